//! The splitting `skew(ℝ^{2k+1}) = 𝔥 ⊕ 𝔪₁ ⊕ 𝔪₂` determined by the model tensors
//! `φ₀`, `ξ₀`, `η₀`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for exact-arithmetic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// A skew-symmetric `(2k+1) × (2k+1)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    k: usize,
    entries: DMatrix<f64>,
}

impl SkewMatrix {
    /// Validates shape and exact skew-symmetry.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::NotSquare { rows: r, cols: c });
        }
        if r % 2 == 0 {
            return Err(Error::EvenSize(r));
        }
        let defect = (&entries + entries.transpose()).amax();
        if defect != 0.0 {
            return Err(Error::NotSkew(defect));
        }
        Ok(Self { k: r / 2, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if let Some(bad) = rows.iter().find(|row| row.len() != r) {
            return Err(Error::NotSquare {
                rows: r,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(r, r, |i, j| rows[i][j]))
    }

    /// Skew part of an arbitrary square matrix of odd size.
    fn skew_part(m: DMatrix<f64>) -> Self {
        let k = m.nrows() / 2;
        Self {
            k,
            entries: (&m - m.transpose()) * 0.5,
        }
    }

    pub fn zero(k: usize) -> Self {
        Self {
            k,
            entries: DMatrix::zeros(2 * k + 1, 2 * k + 1),
        }
    }

    /// Seeded random element with entries uniform in `(-1, 1)`.
    pub fn random(k: usize, rng: &mut impl Rng) -> Self {
        let r = 2 * k + 1;
        let mut m = DMatrix::zeros(r, r);
        for i in 0..r {
            for j in i + 1..r {
                let v = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Self { k, entries: m }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Trace form `⟨a,b⟩ = −tr(ab)`.
    pub fn inner(&self, other: &SkewMatrix) -> f64 {
        -(&self.entries * &other.entries).trace()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.norm_squared()
    }

    pub fn bracket(&self, other: &SkewMatrix) -> SkewMatrix {
        let e = &self.entries * &other.entries - &other.entries * &self.entries;
        Self::skew_part(e)
    }
}

/// `φ₀ = [[0, −I_k, 0], [I_k, 0, 0], [0, 0, 0]]`.
pub fn phi0(k: usize) -> DMatrix<f64> {
    let r = 2 * k + 1;
    let mut m = DMatrix::zeros(r, r);
    for i in 0..k {
        m[(i, k + i)] = -1.0;
        m[(k + i, i)] = 1.0;
    }
    m
}

/// `ξ₀ = (0, …, 0, 1)`.
pub fn xi0(k: usize) -> DVector<f64> {
    let mut v = DVector::zeros(2 * k + 1);
    v[2 * k] = 1.0;
    v
}

/// The complex structure `J₀ = φ₀|ℝ^{2k}`.
pub fn j0(k: usize) -> DMatrix<f64> {
    phi0(k).view((0, 0), (2 * k, 2 * k)).into_owned()
}

/// `η₀ ⊗ ξ₀` as an endomorphism: orthogonal projection onto `ξ₀`.
fn xi_projector(k: usize) -> DMatrix<f64> {
    let x = xi0(k);
    &x * x.transpose()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieSplit {
    pub h_part: SkewMatrix,
    pub m1_part: SkewMatrix,
    pub m2_part: SkewMatrix,
}

impl LieSplit {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.h_part.entries() + self.m1_part.entries() + self.m2_part.entries()
    }
}

/// Components of `a` in `𝔥`, `𝔪₁` and `𝔪₂`.
pub fn decompose(a: &SkewMatrix) -> LieSplit {
    let k = a.k;
    let phi = phi0(k);
    let p = xi_projector(k);
    let e = &a.entries;
    let a_p = e * &p;
    let anti = e * &phi + &phi * e;
    let comm = e * &phi - &phi * e;
    let h = (&phi * anti + &a_p) * -0.5;
    let m1 = (&phi * comm - &a_p) * 0.5;
    let m2 = &a_p + &p * e;
    LieSplit {
        h_part: SkewMatrix { k, entries: h },
        m1_part: SkewMatrix { k, entries: m1 },
        m2_part: SkewMatrix { k, entries: m2 },
    }
}

/// `â = a|ℝ^{2k}` for `a ∈ 𝔥 ⊕ 𝔪₁`.
pub fn hat(a: &SkewMatrix) -> Result<DMatrix<f64>> {
    let off = decompose(a).m2_part.norm_sq().sqrt();
    if off > ALGEBRA_TOL {
        return Err(Error::OutsideSubspace(off));
    }
    let n = 2 * a.k;
    Ok(a.entries.view((0, 0), (n, n)).into_owned())
}

/// `â₂ = a₂(ξ₀) ∈ ℝ^{2k}` for `a₂ ∈ 𝔪₂`.
pub fn hat2(a: &SkewMatrix) -> Result<DVector<f64>> {
    let s = decompose(a);
    let off = (s.h_part.norm_sq() + s.m1_part.norm_sq()).sqrt();
    if off > ALGEBRA_TOL {
        return Err(Error::OutsideSubspace(off));
    }
    let n = 2 * a.k;
    Ok((&a.entries * xi0(a.k)).rows(0, n).into_owned())
}

/// Random elements of each summand, obtained by projecting random matrices.
fn random_parts(k: usize, rng: &mut impl Rng) -> LieSplit {
    decompose(&SkewMatrix::random(k, rng))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct IdentityReport {
    pub k: usize,
    pub trials: usize,
    pub max_violation: f64,
    /// Names of identities whose violation exceeded the tolerance.
    pub failures: Vec<String>,
}

impl IdentityReport {
    fn new(k: usize, trials: usize) -> Self {
        Self {
            k,
            trials,
            max_violation: 0.0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, name: &str, violation: f64) {
        self.max_violation = self.max_violation.max(violation);
        if violation > ALGEBRA_TOL && !self.failures.iter().any(|f| f == name) {
            self.failures.push(name.to_string());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the bracket inclusions of the splitting on random elements.
pub fn verify_bracket_relations(k: usize, trials: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = IdentityReport::new(k, trials);
    let norm = |m: &SkewMatrix| m.norm_sq().sqrt();
    for _ in 0..trials {
        let a = random_parts(k, &mut rng);
        let b = random_parts(k, &mut rng);

        let s = decompose(&a.h_part.bracket(&b.m1_part));
        report.record("[h,m1] in m1", norm(&s.h_part).max(norm(&s.m2_part)));
        let s = decompose(&a.h_part.bracket(&b.m2_part));
        report.record("[h,m2] in m2", norm(&s.h_part).max(norm(&s.m1_part)));
        let s = decompose(&a.m1_part.bracket(&b.m1_part));
        report.record("[m1,m1] in h", norm(&s.m1_part).max(norm(&s.m2_part)));
        let s = decompose(&a.m2_part.bracket(&b.m2_part));
        report.record("[m2,m2] in h+m1", norm(&s.m2_part));
        let s = decompose(&a.m1_part.bracket(&b.m2_part));
        report.record("[m1,m2] in m2", norm(&s.h_part).max(norm(&s.m1_part)));
        let s = decompose(&a.h_part.bracket(&b.h_part));
        report.record("[h,h] in h", norm(&s.m1_part).max(norm(&s.m2_part)));
    }
    report
}

/// Checks the identities relating `𝔪₂` to `ℝ^{2k}` on random elements.
pub fn verify_m2_identities(k: usize, trials: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = IdentityReport::new(k, trials);
    let n = 2 * k;
    let phi = SkewMatrix { k, entries: phi0(k) };
    let xi = xi0(k);
    let j = j0(k);
    for _ in 0..trials {
        let a1 = random_parts(k, &mut rng).m1_part;
        let a2 = random_parts(k, &mut rng).m2_part;
        let b2 = random_parts(k, &mut rng).m2_part;
        let a2_hat = hat2(&a2).expect("projected element lies in m2");
        let mut u = DVector::zeros(n + 1);
        for i in 0..n {
            u[i] = rng.gen_range(-1.0..1.0);
        }
        let u_hat = u.rows(0, n).into_owned();

        let lhs = a2.entries() * &u;
        let rhs = &xi * -a2_hat.dot(&u_hat);
        report.record("a2(u) = -<hat a2, u> xi0", (lhs - rhs).amax());

        let c = phi.bracket(&a2);
        let v = hat2(&c).map(|h| (h - &j * &a2_hat).amax()).unwrap_or(f64::INFINITY);
        report.record("hat2([phi0, a2]) = J0 hat a2", v);

        let c = a1.bracket(&a2);
        let a1_hat = hat(&a1).expect("projected element lies in h+m1");
        let v = hat2(&c).map(|h| (h - a1_hat * &a2_hat).amax()).unwrap_or(f64::INFINITY);
        report.record("hat2([a1, a2]) = hat a1 (hat a2)", v);

        let c = phi.bracket(&b2);
        let back = phi.bracket(&c);
        report.record("b2 = -[phi0, [phi0, b2]]", (b2.entries() + back.entries()).amax());

        let ratio = a2.norm_sq() - 2.0 * a2_hat.norm_squared();
        report.record("|a2|^2 = 2|hat a2|^2", ratio.abs());
    }
    report
}
