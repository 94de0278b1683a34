//! Real hypersurfaces of almost Hermitian manifolds: induced almost contact
//! structures, shape data, and the identities tying the intrinsic harmonicity
//! data to the ambient one.
//!
//! A hypersurface is the coordinate slice `{s = level}` of an ambient chart
//! `(x, s)`, so hypersurface charts are ambient charts with the last variable
//! frozen.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::acs::{unit, AlmostContactStructure, StructurePoint};
use crate::error::{Error, Result};
use crate::geom::curvature::{ricci, Connection};
use crate::geom::model::{pullback_metric, FieldFn};
use crate::geom::tensor::{Slot, Tensor};
use crate::geom::{evaluate, Backend, BoxDomain, FrameChoice, JetSource};
use crate::harmonic::{HarmonicPoint, HarmonicQuantities, HarmonicityReport};
use crate::jet::{self, Jet};
use crate::parallel::{map_points, Execution};

/// Tolerance for the ambient algebraic identities.
pub const AMBIENT_TOL: f64 = 1e-9;
/// Tolerance for the hypersurface identity suite.
pub const IDENTITY_TOL: f64 = 1e-5;
/// Tolerance for the geometric predicates (geodesic, Killing, umbilic, …).
pub const PREDICATE_TOL: f64 = 1e-6;

/// `J_E(p)v` for a point `p` and vector `v` of the Euclidean target, on jets.
pub type ComplexStructureFn = Arc<dyn Fn(&[Jet], &[Jet]) -> Vec<Jet> + Send + Sync>;

/// An almost Hermitian manifold on a chart. Component jets are `g` then `J`
/// (both row-major, `J(∂_j) = J^i_j ∂_i`).
#[derive(Clone)]
pub struct AlmostHermitian {
    dim: usize,
    domain: BoxDomain,
    source: FieldFn,
}

impl fmt::Debug for AlmostHermitian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlmostHermitian")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish()
    }
}

fn nan_matrix(like: &Jet, n: usize) -> Vec<Jet> {
    vec![like.lift_const(f64::NAN); n * n]
}

impl AlmostHermitian {
    pub fn from_source(dim: usize, domain: BoxDomain, source: FieldFn) -> Result<Self> {
        if dim % 2 != 0 || dim == 0 {
            return Err(Error::InvalidParameter(format!("ambient dimension {dim} is not even")));
        }
        if domain.dim() != dim {
            return Err(Error::InvalidParameter(format!(
                "domain has dimension {}, expected {dim}",
                domain.dim()
            )));
        }
        Ok(Self { dim, domain, source })
    }

    /// Ambient chart `map: ℝᴺ → ℝᴷ` into a Euclidean space carrying the
    /// (point-dependent) complex structure `complex`. The induced `J` is
    /// `g⁻¹ dFᵀ J_E(F) dF`.
    pub fn embedded(
        dim: usize,
        domain: BoxDomain,
        map: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
        complex: ComplexStructureFn,
    ) -> Result<Self> {
        let source: FieldFn = Arc::new(move |x, order| {
            let f = map(&Jet::seeds(x, order + 1));
            let g = pullback_metric(&f, dim);
            let p: Vec<Jet> = f.iter().map(|c| c.truncate(order)).collect();
            let df: Vec<Vec<Jet>> = (0..dim).map(|j| f.iter().map(|c| c.diff(j)).collect()).collect();
            let w: Vec<Vec<Jet>> = df.iter().map(|v| complex(&p, v)).collect();
            let zero = g[0].zero_like();
            let lowered: Vec<Jet> = (0..dim * dim)
                .map(|bj| {
                    let (b, j) = (bj / dim, bj % dim);
                    jet::sum(
                        &zero,
                        df[b].iter().zip(&w[j]).map(|(u, v)| u * v).collect::<Vec<_>>().iter(),
                    )
                })
                .collect();
            let ginv = jet::invert(&g, dim).unwrap_or_else(|| nan_matrix(&zero, dim));
            let mut out = g.clone();
            for a in 0..dim {
                for j in 0..dim {
                    let mut acc = zero.clone();
                    for b in 0..dim {
                        acc += &ginv[a * dim + b] * &lowered[b * dim + j];
                    }
                    out.push(acc);
                }
            }
            out
        });
        Self::from_source(dim, domain, source)
    }

    /// `M × ℝ` with the product metric and `JX = φX + η(X)∂_t`, `J∂_t = −ξ`.
    /// The new coordinate `t` is last and ranges over `[−half_width, half_width]`.
    pub fn product_with_line(base: &AlmostContactStructure, half_width: f64) -> Self {
        let m = base.dim();
        let big = m + 1;
        let mut lo = base.domain().lo.clone();
        let mut hi = base.domain().hi.clone();
        lo.push(-half_width);
        hi.push(half_width);
        let base = base.clone();
        let source: FieldFn = Arc::new(move |x, order| {
            let c: Vec<Jet> = base.components(&x[..m], order).iter().map(|j| j.lift(m)).collect();
            let (g, rest) = c.split_at(m * m);
            let (phi, xi) = rest.split_at(m * m);
            let zero = g[0].zero_like();
            let one = g[0].lift_const(1.0);
            let eta: Vec<Jet> = (0..m)
                .map(|j| {
                    let mut acc = zero.clone();
                    for k in 0..m {
                        acc += &g[j * m + k] * &xi[k];
                    }
                    acc
                })
                .collect();
            let mut gt = Vec::with_capacity(big * big);
            let mut jt = Vec::with_capacity(big * big);
            for a in 0..big {
                for b in 0..big {
                    gt.push(match (a < m, b < m) {
                        (true, true) => g[a * m + b].clone(),
                        (false, false) => one.clone(),
                        _ => zero.clone(),
                    });
                    jt.push(match (a < m, b < m) {
                        (true, true) => phi[a * m + b].clone(),
                        (false, true) => eta[b].clone(),
                        (true, false) => -&xi[a],
                        (false, false) => zero.clone(),
                    });
                }
            }
            gt.extend(jt);
            gt
        });
        Self::from_source(big, BoxDomain::new(lo, hi), source).expect("product of an odd-dimensional base is even")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// Checks `J² = −I` and `g(JX,JY) = g(X,Y)` at `points`.
    pub fn validate(&self, points: &[Vec<f64>], exec: Execution) -> Result<HermitianValidation> {
        let n = self.dim;
        let rows = map_points(points, exec, |y| {
            self.domain.check(y)?;
            let c = self.components(y, 0);
            let g = DMatrix::from_fn(n, n, |i, j| c[i * n + j].value());
            let j = DMatrix::from_fn(n, n, |i, k| c[n * n + i * n + k].value());
            let eye = DMatrix::<f64>::identity(n, n);
            Ok(HermitianValidation {
                j_squared: (&j * &j + &eye).amax(),
                compatibility: (j.transpose() * &g * &j - &g).amax(),
            })
        });
        let mut out = HermitianValidation::default();
        for r in rows {
            let r = r?;
            out.j_squared = out.j_squared.max(r.j_squared);
            out.compatibility = out.compatibility.max(r.compatibility);
        }
        Ok(out)
    }
}

impl JetSource for AlmostHermitian {
    fn nvars(&self) -> usize {
        self.dim
    }

    fn components(&self, x: &[f64], order: usize) -> Vec<Jet> {
        (self.source)(x, order)
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq)]
pub struct HermitianValidation {
    pub j_squared: f64,
    pub compatibility: f64,
}

impl HermitianValidation {
    pub fn max_violation(&self) -> f64 {
        self.j_squared.max(self.compatibility)
    }

    pub fn require(&self, tol: f64) -> Result<()> {
        let violation = self.max_violation();
        if violation <= tol {
            Ok(())
        } else {
            Err(Error::InvalidStructure { violation, tol })
        }
    }
}

/// `ν^a = sign · g^{as} / √g^{ss}` with `s` the last variable.
fn unit_normal(ginv: &[Jet], big: usize, sign: f64) -> Vec<Jet> {
    let s = big - 1;
    let norm = ginv[s * big + s].sqrt().recip();
    (0..big).map(|a| &ginv[a * big + s] * &norm * sign).collect()
}

/// Components `[g, φ, ξ]` of the induced structure on `{s = const}` from ambient
/// components `[g̃, J̃]`: `ξ = −J̃ν`, `φX = J̃X − η(X)ν`.
fn induced_components(amb: &[Jet], big: usize, sign: f64) -> Vec<Jet> {
    let m = big - 1;
    let (g, j) = amb.split_at(big * big);
    let zero = g[0].zero_like();
    let ginv = jet::invert(g, big).unwrap_or_else(|| nan_matrix(&zero, big));
    let nu = unit_normal(&ginv, big, sign);
    let xi: Vec<Jet> = (0..big)
        .map(|a| {
            let mut acc = zero.clone();
            for b in 0..big {
                acc -= &j[a * big + b] * &nu[b];
            }
            acc
        })
        .collect();
    let mut out = Vec::with_capacity(2 * m * m + m);
    for a in 0..m {
        for b in 0..m {
            out.push(g[a * big + b].restrict(m));
        }
    }
    for a in 0..m {
        for k in 0..m {
            let mut eta = zero.clone();
            for b in 0..big {
                eta += &g[k * big + b] * &xi[b];
            }
            out.push((&j[a * big + k] - &eta * &nu[a]).restrict(m));
        }
    }
    out.extend(xi[..m].iter().map(|v| v.restrict(m)));
    out
}

/// A hypersurface `{s = level}` of an almost Hermitian chart `(x, s)`.
#[derive(Debug, Clone)]
pub struct HypersurfaceModel {
    pub ambient: AlmostHermitian,
    pub level: f64,
    pub normal_sign: f64,
    /// Whether the ambient is `M × ℝ` built by [`AlmostHermitian::product_with_line`].
    pub product: bool,
    structure: AlmostContactStructure,
}

impl HypersurfaceModel {
    /// The slice at `level` over the hypersurface chart box `domain`, with unit
    /// normal pointing towards increasing `s` when `normal_sign > 0`.
    pub fn slice(ambient: AlmostHermitian, level: f64, normal_sign: f64, domain: BoxDomain) -> Result<Self> {
        let big = ambient.dim();
        let m = big - 1;
        if domain.dim() != m {
            return Err(Error::InvalidParameter(format!(
                "hypersurface domain has dimension {}, expected {m}",
                domain.dim()
            )));
        }
        let (lo, hi) = (&ambient.domain().lo, &ambient.domain().hi);
        let inside = (lo[m]..=hi[m]).contains(&level) && (0..m).all(|i| lo[i] <= domain.lo[i] && domain.hi[i] <= hi[i]);
        if !inside {
            return Err(Error::InvalidParameter(
                "hypersurface chart leaves the ambient chart".into(),
            ));
        }
        if normal_sign.abs() != 1.0 {
            return Err(Error::InvalidParameter("normal sign must be ±1".into()));
        }
        let amb = ambient.clone();
        let source: FieldFn = Arc::new(move |x, order| {
            let mut y = x.to_vec();
            y.push(level);
            induced_components(&amb.components(&y, order), big, normal_sign)
        });
        let structure = AlmostContactStructure::from_source(m, domain, source)?;
        Ok(Self {
            ambient,
            level,
            normal_sign,
            product: false,
            structure,
        })
    }

    /// `M × ℝ` and its slice `t = 0`, which carries `base` again.
    pub fn product_with_line(base: &AlmostContactStructure, half_width: f64) -> Result<Self> {
        let ambient = AlmostHermitian::product_with_line(base, half_width);
        let mut hs = Self::slice(ambient, 0.0, 1.0, base.domain().clone())?;
        hs.product = true;
        Ok(hs)
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim() - 1
    }

    pub fn n(&self) -> usize {
        self.dim() / 2
    }

    pub fn domain(&self) -> &BoxDomain {
        self.structure.domain()
    }

    /// Ambient chart point of a hypersurface chart point.
    pub fn ambient_point(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        y.push(self.level);
        y
    }

    /// The induced almost contact metric structure.
    pub fn induce_structure(&self) -> &AlmostContactStructure {
        &self.structure
    }

    pub fn at(&self, x: &[f64], backend: Backend) -> Result<HypersurfacePoint> {
        self.at_in_frame(x, backend, FrameChoice::Coordinate)
    }

    pub fn at_in_frame(&self, x: &[f64], backend: Backend, choice: FrameChoice) -> Result<HypersurfacePoint> {
        let intrinsic = self.structure.at_in_frame(x, backend, choice)?;
        HypersurfacePoint::new(self, intrinsic, backend)
    }
}

/// Extrinsic data at a point, in the hypersurface frame `E_1, …, E_{2n}, ξ`.
#[derive(Debug, Clone)]
pub struct ShapeData {
    /// Shape operator `AX = −∇̃_Xν`.
    pub a: DMatrix<f64>,
    /// Second fundamental form `α(X,Y) = ⟨X, AY⟩`.
    pub alpha: DMatrix<f64>,
    /// Mean curvature, `(2n+1)H = tr A`.
    pub h: f64,
    /// Tangential part of `∇̃_νJ`.
    pub gamma1: DMatrix<f64>,
    /// Tangential part of `∇̃²_{ν,ν}J`.
    pub gamma2: DMatrix<f64>,
}

impl ShapeData {
    /// Largest violation of: `A` self-adjoint, `α = ⟨·, A·⟩`, `Γ₁`, `Γ₂` skew.
    pub fn invariant_defect(&self) -> f64 {
        let a = &self.a;
        (a - a.transpose())
            .amax()
            .max((&self.alpha - a).amax())
            .max((&self.gamma1 + self.gamma1.transpose()).amax())
            .max((&self.gamma2 + self.gamma2.transpose()).amax())
    }
}

/// Intrinsic and ambient data at one hypersurface point. The ambient frame is
/// the hypersurface frame followed by `ν`.
#[derive(Debug, Clone)]
pub struct HypersurfacePoint {
    pub intrinsic: StructurePoint,
    pub harmonic: HarmonicQuantities,
    pub shape: ShapeData,
    /// `dH` in the hypersurface frame.
    pub grad_h: DVector<f64>,
    /// `(∇_{E_k}α)(E_i,E_j)` at `[i][j][k]`.
    pub nabla_alpha: Tensor<f64>,
    pub ambient_j: DMatrix<f64>,
    /// `(∇̃_{Ẽ_i}J)` at `[a][b][i]`.
    pub ambient_dj: Tensor<f64>,
    /// `∇̃²_{Ẽ_i,Ẽ_j}J` at `[a][b][j][i]`.
    pub ambient_ddj: Tensor<f64>,
    pub ambient_riemann: Tensor<f64>,
    /// Chart normal component of `∇̃_{∂_i}ν`, which must vanish.
    pub normal_tangency: f64,
}

impl HypersurfacePoint {
    fn new(hs: &HypersurfaceModel, intrinsic: StructurePoint, backend: Backend) -> Result<Self> {
        let big = hs.ambient.dim();
        let m = big - 1;
        let y = hs.ambient_point(&intrinsic.x);
        hs.ambient.domain().check(&y)?;
        let amb = evaluate(&hs.ambient, &y, backend);
        let (g, j) = amb.split_at(big * big);
        let conn = Connection::new(g.to_vec(), &y)?;
        let nu = unit_normal(&conn.inverse, big, hs.normal_sign);
        if nu.iter().any(|c| !c.value().is_finite()) {
            return Err(Error::IllDefinedNormal(y));
        }
        let j_t = Tensor::from_vec(big, vec![Slot::Up, Slot::Down], j.to_vec());
        let dj = conn.nabla(&j_t);
        let ddj = conn.nabla(&dj);
        let dnu = conn.nabla(&Tensor::from_vec(big, vec![Slot::Up], nu.clone()));
        let normal_tangency = (0..m).map(|i| dnu.get(&[m, i]).value().abs()).fold(0.0, f64::max);

        let shape_jets: Vec<Jet> = (0..m * m).map(|ai| (-dnu.get(&[ai / m, ai % m])).restrict(m)).collect();
        let mconn = &intrinsic.conn;
        let alpha_jets: Vec<Jet> = (0..m * m)
            .map(|ij| {
                let (i, jj) = (ij / m, ij % m);
                let mut acc = shape_jets[0].zero_like();
                for k in 0..m {
                    acc += &mconn.metric[i * m + k] * &shape_jets[k * m + jj];
                }
                acc
            })
            .collect();
        let trace = jet::sum(&shape_jets[0].zero_like(), (0..m).map(|k| &shape_jets[k * m + k]));
        let h_jet = trace.scale(1.0 / m as f64);
        let nabla_alpha_chart = mconn.nabla(&Tensor::from_vec(m, vec![Slot::Down, Slot::Down], alpha_jets));

        let e = &intrinsic.frame.vectors;
        let einv = &intrinsic.frame.inverse;
        let shape_t = Tensor::from_vec(m, vec![Slot::Up, Slot::Down], shape_jets).values();
        let a = shape_t.to_basis(e, einv).as_matrix();
        let nabla_alpha = nabla_alpha_chart.values().to_basis(e, einv);
        let grad_h = e.transpose() * DVector::from_vec(h_jet.gradient());

        let gv = conn.metric_values();
        let mut et = DMatrix::zeros(big, big);
        et.view_mut((0, 0), (m, m)).copy_from(e);
        for a in 0..big {
            et[(a, m)] = nu[a].value();
        }
        let etinv = et.transpose() * &gv;
        let to = |t: &Tensor<Jet>| t.values().to_basis(&et, &etinv);
        let ambient_j = to(&j_t).as_matrix();
        let ambient_dj = to(&dj);
        let ambient_ddj = ddj.values().to_basis(&et, &etinv);
        let ambient_riemann = conn.riemann().to_basis(&et, &etinv);

        let block = |mat: DMatrix<f64>| mat.view((0, 0), (m, m)).into_owned();
        let gamma1 = block(ambient_dj.matrix_at(&[m]));
        let gamma2 = block(ambient_ddj.matrix_at(&[m, m]));
        let shape = ShapeData {
            alpha: a.clone(),
            a,
            h: h_jet.value(),
            gamma1,
            gamma2,
        };
        let harmonic = HarmonicQuantities::compute(&intrinsic);
        Ok(Self {
            intrinsic,
            harmonic,
            shape,
            grad_h,
            nabla_alpha,
            ambient_j,
            ambient_dj,
            ambient_ddj,
            ambient_riemann,
            normal_tangency,
        })
    }

    pub fn dim(&self) -> usize {
        self.intrinsic.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim() + 1
    }

    /// Index of `ν` in the ambient frame.
    pub fn nu_index(&self) -> usize {
        self.dim()
    }

    /// A hypersurface frame vector as an ambient frame vector.
    pub fn pad(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.ambient_dim(), |a, _| if a < v.len() { v[a] } else { 0.0 })
    }

    /// `∇̃_{Ẽ_i}J`.
    pub fn ambient_dj_at(&self, i: usize) -> DMatrix<f64> {
        self.ambient_dj.matrix_at(&[i])
    }

    /// `∇̃*∇̃J = −Σ ∇̃²_{Ẽ_i,Ẽ_i}J`.
    pub fn ambient_rough_laplacian(&self) -> DMatrix<f64> {
        let big = self.ambient_dim();
        -(0..big).fold(DMatrix::zeros(big, big), |acc, i| {
            acc + self.ambient_ddj.matrix_at(&[i, i])
        })
    }

    /// `τ̃(J) = ¼[∇̃*∇̃J, J]`.
    pub fn ambient_tau(&self) -> DMatrix<f64> {
        let l = self.ambient_rough_laplacian();
        let j = &self.ambient_j;
        (&l * j - j * &l) * 0.25
    }

    /// `max |∇̃_XJ(Y) + ∇̃_YJ(X)|` over frame pairs; zero iff nearly Kähler.
    pub fn nearly_kahler_defect(&self) -> f64 {
        let big = self.ambient_dim();
        let mut worst = 0.0f64;
        for a in 0..big {
            for b in 0..big {
                for i in b..big {
                    let v = self.ambient_dj.get(&[a, b, i]) + self.ambient_dj.get(&[a, i, b]);
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    /// `min_i |∇̃_{Ẽ_i}J|`, positive for strict nearly Kähler ambients.
    pub fn strictness(&self) -> f64 {
        (0..self.ambient_dim())
            .map(|i| self.ambient_dj_at(i).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn ambient_ricci(&self) -> DMatrix<f64> {
        ricci(&self.ambient_riemann).as_matrix()
    }

    /// `∇*α(Z) = −Σ_i (∇_{E_i}α)(E_i, Z)`.
    pub fn div_alpha(&self) -> DVector<f64> {
        let m = self.dim();
        DVector::from_fn(m, |z, _| -(0..m).map(|i| self.nabla_alpha.get(&[i, z, i])).sum::<f64>())
    }

    /// `⟨ψ̃,Ψ̃⟩(X) = ¼ Σ_{i,j} ⟨R̃(Ẽ_i,X)Ẽ_j, J∇̃_{Ẽ_i}J(Ẽ_j)⟩` for `X` tangent.
    pub fn ambient_twistor_form(&self) -> DVector<f64> {
        let big = self.ambient_dim();
        let j = &self.ambient_j;
        DVector::from_fn(self.dim(), |c, _| {
            let mut acc = 0.0;
            for i in 0..big {
                let r = self.ambient_riemann.matrix_at(&[i, c]);
                let t = j * self.ambient_dj_at(i);
                acc += (r.transpose() * t).trace();
            }
            0.25 * acc
        })
    }

    /// Residuals of the two identities for `∇̃_XJ(ξ)` and `∇̃_XJ(ν)`.
    pub fn ambient_dj_formulas(&self) -> (f64, f64) {
        let m = self.dim();
        let p = &self.intrinsic;
        let phi = &p.phi;
        let dxi = p.dxi();
        let a = &self.shape.a;
        let xi_amb = unit(m + 1, m - 1);
        let nu_amb = unit(m + 1, m);
        let (mut ra, mut rb) = (0.0f64, 0.0f64);
        for i in 0..m {
            let k = self.ambient_dj_at(i);
            let ax = a.column(i).into_owned();
            let dxi_i = dxi.column(i).into_owned();
            let rhs_a = self.pad(&(phi * phi * &ax)) - &self.ambient_j * self.pad(&dxi_i);
            ra = ra.max((&k * &xi_amb - rhs_a).norm());
            let rhs_b = self.pad(&(phi * &ax - &dxi_i));
            rb = rb.max((&k * &nu_amb - rhs_b).norm());
        }
        (ra, rb)
    }

    /// Discrepancies between `τ̃(J)` restricted to `M` and the assembled
    /// intrinsic right-hand sides, for the `𝒟×𝒟` and `𝒟×ξ` components.
    pub fn tau_tilde_crosscheck(&self) -> (f64, f64) {
        let n2 = 2 * self.intrinsic.n;
        let m = self.dim();
        let xi = m - 1;
        let p = &self.intrinsic;
        let phi = &p.phi;
        let dxi = p.dxi();
        let s = &self.shape;
        let q = &self.harmonic;
        let tau = self.ambient_tau();
        let comm = &s.gamma2 * phi - phi * &s.gamma2;
        let c = m as f64 * s.h;
        let twist = |z: usize| -> DVector<f64> {
            let ez = unit(m, z);
            phi * &dxi * (&s.a * &ez) - &dxi * (&s.a * (phi * &ez))
        };
        let mut worst_a = 0.0f64;
        for z in 0..n2 {
            let tz = twist(z);
            for w in 0..n2 {
                let tw = twist(w);
                let rhs =
                    2.0 * q.tau_bar[(w, z)] - 0.5 * comm[(w, z)] + c * phi.column(w).dot(&s.gamma1.column(z)) + tz[w]
                        - tw[z];
                worst_a = worst_a.max((2.0 * tau[(w, z)] - rhs).abs());
            }
        }
        let div = self.div_alpha();
        let lap_jt = &q.rough_laplacian_xi + phi * &q.t_phi;
        let a_xi = s.a.column(xi).into_owned();
        let dxi_axi = &dxi * &a_xi;
        let mut worst_b = 0.0f64;
        for z in 0..n2 {
            let ez = unit(m, z);
            let jz = phi * &ez;
            let pairing: f64 = (0..m).map(|i| (p.kbar(i) * &ez).dot(&s.a.column(i))).sum();
            let rhs = div.dot(&jz) - pairing + lap_jt[z] - a_xi.dot(&s.a.column(z)) + 2.0 * dxi_axi.dot(&jz);
            worst_b = worst_b.max((2.0 * tau[(xi, z)] - rhs).abs());
        }
        (worst_a, worst_b)
    }

    /// `max_Z |∇*α(Z) − Ric̃(Z,ν) + (2n+1) dH(Z)|`.
    pub fn codazzi(&self) -> f64 {
        let m = self.dim();
        let ric = self.ambient_ricci();
        let div = self.div_alpha();
        (0..m)
            .map(|z| (div[z] - ric[(z, m)] + m as f64 * self.grad_h[z]).abs())
            .fold(0.0, f64::max)
    }

    /// Identities specific to nearly Kähler ambients.
    pub fn nearly_kahler_identities(&self) -> NearlyKahlerResiduals {
        let m = self.dim();
        let n2 = m - 1;
        let p = &self.intrinsic;
        let phi = &p.phi;
        let dxi = p.dxi();
        let s = &self.shape;
        let q = &self.harmonic;
        let g1 = &s.gamma1;
        let nu = unit(m + 1, m);
        let jric = {
            let r = self.ambient_ricci();
            (self.ambient_j.transpose() * &r * &self.ambient_j - &r).amax()
        };
        let anti = g1 * phi + phi * g1;
        let acomm = &s.a * phi + phi * &s.a;
        let predicted_tau = phi * g1 * (0.5 * m as f64 * s.h) - (&acomm * g1 - g1 * &acomm) * 0.5;
        let proj = p.projector();
        let tau_bar_formula = (&proj * (&q.tau_bar - predicted_tau) * &proj).amax();
        let div = self.div_alpha();
        let lap_jt = &q.rough_laplacian_xi + phi * &q.t_phi;
        let a_xi = s.a.column(m - 1).into_owned();
        let lhs_b = g1 * phi - &s.a;
        let xi_formula = (0..n2)
            .map(|z| {
                let ez = unit(m, z);
                let rhs = (&lhs_b * &ez).dot(&a_xi) - div.dot(&(phi * &ez));
                (lap_jt[z] - rhs).abs()
            })
            .fold(0.0, f64::max);
        NearlyKahlerResiduals {
            normal_derivative: (self.ambient_dj_at(m) * &nu).norm(),
            gamma1_formula: (g1 - (&dxi - phi * &s.a)).amax(),
            gamma1_anticommutes: anti.amax(),
            gamma2_formula: (&s.gamma2 - g1.transpose() * phi * g1).amax(),
            gamma2_commutes: (&s.gamma2 * phi - phi * &s.gamma2).amax(),
            ricci_j_invariance: jric,
            tau_bar_formula,
            xi_formula,
        }
    }

    /// The four hypersurface characterizations of a nearly Kähler ambient.
    pub fn characterizations(&self, tol: f64) -> Characterizations {
        let m = self.dim();
        let xi = m - 1;
        let p = &self.intrinsic;
        let phi = &p.phi;
        let dxi = p.dxi();
        let s = &self.shape;
        let a_xi = s.a.column(xi).into_owned();
        let xi_v = unit(m, xi);
        let geodesic = dxi.column(xi).norm();
        let principal = (&a_xi - &xi_v * a_xi[xi]).norm();
        let commutator = phi * &s.a - &s.a * phi;
        let killing = (&dxi + dxi.transpose()).amax();
        let acomm = &s.a * phi + phi * &s.a;
        let contact = (p.d_eta() - phi).amax();
        let contact_shape = s.gamma1.amax().max((&acomm + phi * 2.0).amax());
        let nearly_cos = {
            let d = &p.nabla_phi;
            let mut worst = 0.0f64;
            for a in 0..m {
                for b in 0..m {
                    for i in b..m {
                        worst = worst.max((d.get(&[a, b, i]) + d.get(&[a, i, b])).abs());
                    }
                }
            }
            worst
        };
        let alpha_form = (&s.alpha - &xi_v * xi_v.transpose() * (m as f64 * s.h)).amax();
        Characterizations {
            geodesic_formula: (dxi.column(xi) - phi * &a_xi).norm(),
            killing_formula: (&dxi + dxi.transpose() - &commutator).amax(),
            contact_formula: (p.d_eta() * 2.0 + &s.gamma1 * 2.0 + &acomm).amax(),
            xi_geodesic: geodesic < tol,
            xi_principal: principal < tol,
            xi_killing: killing < tol,
            shape_commutes: commutator.amax() < tol,
            contact_metric: contact < tol,
            contact_shape: contact_shape < tol,
            nearly_cosymplectic: nearly_cos < tol,
            alpha_characteristic: alpha_form < tol,
            killing_defect: killing,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq)]
pub struct NearlyKahlerResiduals {
    /// `|∇̃_νJ(ν)|`.
    pub normal_derivative: f64,
    /// `Γ₁ = ∇ξ − φA`.
    pub gamma1_formula: f64,
    /// `Γ₁φ + φΓ₁`.
    pub gamma1_anticommutes: f64,
    /// `⟨Γ₂X,Y⟩ = ⟨φΓ₁X,Γ₁Y⟩`.
    pub gamma2_formula: f64,
    pub gamma2_commutes: f64,
    pub ricci_j_invariance: f64,
    /// `⟨τ̄Z,W⟩ = ½(2n+1)H⟨JΓ₁Z,W⟩ − ½⟨[{A,φ},Γ₁]Z,W⟩`.
    pub tau_bar_formula: f64,
    /// `⟨∇*∇ξ + JT(φ), Z⟩ = ⟨(Γ₁J − A)Z, Aξ⟩ − ∇*α(JZ)`.
    pub xi_formula: f64,
}

impl NearlyKahlerResiduals {
    fn absorb(&mut self, o: &Self) {
        self.normal_derivative = self.normal_derivative.max(o.normal_derivative);
        self.gamma1_formula = self.gamma1_formula.max(o.gamma1_formula);
        self.gamma1_anticommutes = self.gamma1_anticommutes.max(o.gamma1_anticommutes);
        self.gamma2_formula = self.gamma2_formula.max(o.gamma2_formula);
        self.gamma2_commutes = self.gamma2_commutes.max(o.gamma2_commutes);
        self.ricci_j_invariance = self.ricci_j_invariance.max(o.ricci_j_invariance);
        self.tau_bar_formula = self.tau_bar_formula.max(o.tau_bar_formula);
        self.xi_formula = self.xi_formula.max(o.xi_formula);
    }

    pub fn max(&self) -> f64 {
        [
            self.normal_derivative,
            self.gamma1_formula,
            self.gamma1_anticommutes,
            self.gamma2_formula,
            self.gamma2_commutes,
            self.ricci_j_invariance,
            self.tau_bar_formula,
            self.xi_formula,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Pointwise predicates and the formulas linking them, for nearly Kähler ambients.
#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq)]
pub struct Characterizations {
    /// `|∇_ξξ − φAξ|`.
    pub geodesic_formula: f64,
    /// `|⟨∇_Xξ,Y⟩ + ⟨X,∇_Yξ⟩ − ⟨[φ,A]X,Y⟩|`.
    pub killing_formula: f64,
    /// `|2dη + ⟨·,(2Γ₁ + {A,φ})·⟩|`.
    pub contact_formula: f64,
    pub xi_geodesic: bool,
    pub xi_principal: bool,
    pub xi_killing: bool,
    pub shape_commutes: bool,
    pub contact_metric: bool,
    /// `Γ₁ = 0` and `{A,φ} = −2φ`.
    pub contact_shape: bool,
    pub nearly_cosymplectic: bool,
    /// `α = (2n+1)H η⊗η`.
    pub alpha_characteristic: bool,
    pub killing_defect: f64,
}

impl Characterizations {
    /// Whether each biconditional holds at this point.
    pub fn biconditionals(&self) -> [bool; 4] {
        [
            self.xi_geodesic == self.xi_principal,
            self.xi_killing == self.shape_commutes,
            self.contact_metric == self.contact_shape,
            self.nearly_cosymplectic == self.alpha_characteristic,
        ]
    }
}

/// One row of a hypersurface report.
#[derive(Debug, Clone, Serialize)]
pub struct HypersurfacePointReport {
    #[serde(flatten)]
    pub harmonic: HarmonicPoint,
    #[serde(rename = "A_norm")]
    pub a_norm: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "Gamma1_norm")]
    pub gamma1_norm: f64,
    #[serde(rename = "Gamma2_norm")]
    pub gamma2_norm: f64,
    pub ambient_tau_norm: f64,
    pub ambient_twistor_norm: f64,
    pub nearly_kahler_defect: f64,
    pub strictness: f64,
    pub shape_invariant_defect: f64,
    pub normal_tangency: f64,
    pub dj_xi_formula: f64,
    pub dj_nu_formula: f64,
    pub tau_crosscheck_a: f64,
    pub tau_crosscheck_b: f64,
    pub codazzi: f64,
    /// `|⟨ψ̃,Ψ̃⟩ − form1 − ½ form2|`, for product ambients.
    pub product_twistor_identity: Option<f64>,
    /// `|∇*∇ξ − |∇ξ|²ξ + JT(φ)|`, for product ambients.
    pub product_xi_residual: Option<f64>,
    pub nearly_kahler: Option<NearlyKahlerResiduals>,
    pub characterizations: Option<Characterizations>,
    /// `|P ∇*α|`.
    pub div_alpha_horizontal: f64,
    /// `|P(∇*∇ξ − |∇ξ|²ξ + JT(φ) + φ∇H)|`.
    pub umbilic_xi_formula: f64,
    /// `|P(τ̄ − ½(2n−3)HJΓ₁)P|`.
    pub umbilic_tau_formula: f64,
    pub umbilic_defect: f64,
}

impl HypersurfacePointReport {
    pub fn new(hs: &HypersurfaceModel, p: &HypersurfacePoint) -> Self {
        let m = p.dim();
        let n = p.intrinsic.n as f64;
        let q = &p.harmonic;
        let s = &p.shape;
        let phi = &p.intrinsic.phi;
        let proj = p.intrinsic.projector();
        let nk = p.nearly_kahler_defect();
        let is_nk = nk < IDENTITY_TOL;
        let (la, lb) = p.ambient_dj_formulas();
        let (ca, cb) = p.tau_tilde_crosscheck();
        let (pt, px) = if hs.product {
            let f = p.ambient_twistor_form() - &q.form1 - &q.form2 * 0.5;
            let r = &q.xi_residual + phi * &q.t_phi;
            (Some(f.amax()), Some(r.norm()))
        } else {
            (None, None)
        };
        let xi_formula = &proj * (&q.xi_residual + phi * &q.t_phi + phi * &p.grad_h);
        let tau_formula = &proj * (&q.tau_bar - phi * &s.gamma1 * (0.5 * (2.0 * n - 3.0) * s.h)) * &proj;
        Self {
            harmonic: HarmonicPoint::from_quantities(&p.intrinsic.x, q),
            a_norm: s.a.norm(),
            h: s.h,
            gamma1_norm: s.gamma1.norm(),
            gamma2_norm: s.gamma2.norm(),
            ambient_tau_norm: p.ambient_tau().norm(),
            ambient_twistor_norm: p.ambient_twistor_form().norm(),
            nearly_kahler_defect: nk,
            strictness: p.strictness(),
            shape_invariant_defect: s.invariant_defect(),
            normal_tangency: p.normal_tangency,
            dj_xi_formula: la,
            dj_nu_formula: lb,
            tau_crosscheck_a: ca,
            tau_crosscheck_b: cb,
            codazzi: p.codazzi(),
            product_twistor_identity: pt,
            product_xi_residual: px,
            nearly_kahler: is_nk.then(|| p.nearly_kahler_identities()),
            characterizations: is_nk.then(|| p.characterizations(PREDICATE_TOL)),
            div_alpha_horizontal: (&proj * p.div_alpha()).norm(),
            umbilic_xi_formula: xi_formula.norm(),
            umbilic_tau_formula: tau_formula.amax(),
            umbilic_defect: (&s.a - DMatrix::identity(m, m) * s.h).amax(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq)]
pub struct AmbientSummary {
    #[serde(rename = "A_norm")]
    pub a_norm: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "H_min")]
    pub h_min: f64,
    #[serde(rename = "H_max")]
    pub h_max: f64,
    #[serde(rename = "Gamma1_norm")]
    pub gamma1_norm: f64,
    #[serde(rename = "Gamma2_norm")]
    pub gamma2_norm: f64,
    pub ambient_tau_norm: f64,
    pub ambient_twistor_norm: f64,
    pub nearly_kahler_defect: f64,
}

/// Maxima of the identity residuals over the sample.
#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq)]
pub struct IdentityMaxima {
    pub dj_xi_formula: f64,
    pub dj_nu_formula: f64,
    pub tau_crosscheck_a: f64,
    pub tau_crosscheck_b: f64,
    pub codazzi: f64,
    pub shape_invariant_defect: f64,
    pub normal_tangency: f64,
    pub product_twistor_identity: Option<f64>,
    pub product_xi_residual: Option<f64>,
    pub nearly_kahler: Option<NearlyKahlerResiduals>,
}

impl IdentityMaxima {
    /// Largest residual among the identities that apply to this model.
    pub fn max(&self) -> f64 {
        [
            self.dj_xi_formula,
            self.dj_nu_formula,
            self.tau_crosscheck_a,
            self.tau_crosscheck_b,
            self.codazzi,
            self.shape_invariant_defect,
            self.normal_tangency,
            self.product_twistor_identity.unwrap_or(0.0),
            self.nearly_kahler.map_or(0.0, |r| r.max()),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Hypothesis gates and predicted verdicts for the nearly Kähler theorems.
#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq)]
pub struct TheoremChecks {
    pub nearly_kahler_ambient: bool,
    pub strict_ambient: bool,
    /// `Γ₁ = 0` and `ξ` principal at every point.
    pub shape_hypotheses: bool,
    /// Under the shape hypotheses: harmonic, `ξ` harmonic and `∇*α`
    /// characteristic agree.
    pub shape_theorem_holds: Option<bool>,
    pub totally_umbilic: bool,
    pub totally_geodesic: bool,
    /// For totally umbilic hypersurfaces: the predicted harmonic-section verdict.
    pub umbilic_prediction: Option<bool>,
    pub umbilic_theorem_holds: Option<bool>,
    /// Product ambients: ambient `τ̃(J) = 0` iff `τ̄(J) = 0` and the product residual vanishes.
    pub product_theorem_holds: Option<bool>,
    /// Each of the four nearly Kähler biconditionals held at every point.
    pub biconditionals: Option<[bool; 4]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypersurfaceReport {
    pub harmonic: HarmonicityReport,
    pub per_point: Vec<HypersurfacePointReport>,
    pub ambient: AmbientSummary,
    pub identities: IdentityMaxima,
    pub theorems: TheoremChecks,
}

fn opt_max(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Evaluates the full hypersurface suite at `points`.
pub fn hypersurface_report(
    hs: &HypersurfaceModel,
    points: &[Vec<f64>],
    tol: f64,
    backend: Backend,
    exec: Execution,
) -> Result<HypersurfaceReport> {
    let rows = map_points(points, exec, |x| {
        let p = hs.at(x, backend)?;
        Ok(HypersurfacePointReport::new(hs, &p))
    });
    let per_point = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let harmonic = HarmonicityReport::from_points(per_point.iter().map(|r| r.harmonic.clone()).collect(), tol);
    let mx = |f: &dyn Fn(&HypersurfacePointReport) -> f64| per_point.iter().map(f).fold(0.0, f64::max);
    let count = per_point.len().max(1) as f64;
    let ambient = AmbientSummary {
        a_norm: mx(&|r| r.a_norm),
        h: per_point.iter().map(|r| r.h).sum::<f64>() / count,
        h_min: per_point.iter().map(|r| r.h).fold(f64::INFINITY, f64::min),
        h_max: per_point.iter().map(|r| r.h).fold(f64::NEG_INFINITY, f64::max),
        gamma1_norm: mx(&|r| r.gamma1_norm),
        gamma2_norm: mx(&|r| r.gamma2_norm),
        ambient_tau_norm: mx(&|r| r.ambient_tau_norm),
        ambient_twistor_norm: mx(&|r| r.ambient_twistor_norm),
        nearly_kahler_defect: mx(&|r| r.nearly_kahler_defect),
    };
    let nearly_kahler_ambient = per_point.iter().all(|r| r.nearly_kahler.is_some());
    let mut identities = IdentityMaxima {
        dj_xi_formula: mx(&|r| r.dj_xi_formula),
        dj_nu_formula: mx(&|r| r.dj_nu_formula),
        tau_crosscheck_a: mx(&|r| r.tau_crosscheck_a),
        tau_crosscheck_b: mx(&|r| r.tau_crosscheck_b),
        codazzi: mx(&|r| r.codazzi),
        shape_invariant_defect: mx(&|r| r.shape_invariant_defect),
        normal_tangency: mx(&|r| r.normal_tangency),
        ..Default::default()
    };
    for r in &per_point {
        identities.product_twistor_identity = opt_max(identities.product_twistor_identity, r.product_twistor_identity);
        identities.product_xi_residual = opt_max(identities.product_xi_residual, r.product_xi_residual);
    }
    if nearly_kahler_ambient {
        let mut acc = NearlyKahlerResiduals::default();
        for r in &per_point {
            acc.absorb(r.nearly_kahler.as_ref().expect("checked above"));
        }
        identities.nearly_kahler = Some(acc);
    }

    let v = harmonic.verdicts;
    let mut theorems = TheoremChecks {
        nearly_kahler_ambient,
        ..Default::default()
    };
    if nearly_kahler_ambient {
        let ch: Vec<Characterizations> = per_point.iter().filter_map(|r| r.characterizations).collect();
        let mut bic = [true; 4];
        for c in &ch {
            for (b, ok) in bic.iter_mut().zip(c.biconditionals()) {
                *b &= ok;
            }
        }
        theorems.biconditionals = Some(bic);
        theorems.strict_ambient = per_point.iter().all(|r| r.strictness > IDENTITY_TOL);
        theorems.shape_hypotheses = per_point
            .iter()
            .all(|r| r.gamma1_norm < PREDICATE_TOL && r.characterizations.is_some_and(|c| c.xi_principal));
        if theorems.shape_hypotheses {
            let div_char = per_point
                .iter()
                .all(|r| r.div_alpha_horizontal < tol * r.harmonic.scale);
            theorems.shape_theorem_holds = Some(v.harmonic_section == v.xi_harmonic && v.xi_harmonic == div_char);
        }
        theorems.totally_umbilic = per_point.iter().all(|r| r.umbilic_defect < PREDICATE_TOL);
        theorems.totally_geodesic = per_point.iter().all(|r| r.a_norm < PREDICATE_TOL);
        if theorems.totally_umbilic {
            let predicted = theorems.totally_geodesic && v.xi_harmonic;
            theorems.umbilic_prediction = Some(predicted);
            theorems.umbilic_theorem_holds = Some(if theorems.strict_ambient {
                predicted == v.harmonic_section
            } else {
                !predicted || v.harmonic_section
            });
        }
    }
    if hs.product {
        let ambient_harmonic = per_point.iter().all(|r| r.ambient_tau_norm < tol * r.harmonic.scale);
        let intrinsic = v.j_harmonic
            && per_point
                .iter()
                .all(|r| r.product_xi_residual.unwrap_or(0.0) < tol * r.harmonic.scale);
        theorems.product_theorem_holds = Some(ambient_harmonic == intrinsic);
    }
    Ok(HypersurfaceReport {
        harmonic,
        per_point,
        ambient,
        identities,
        theorems,
    })
}
