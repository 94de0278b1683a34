//! Almost contact metric structures `(φ, ξ, η, g)`: pointwise evaluation,
//! validation, fundamental forms and classification.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::curvature::{curvature_operator, r_operator, ricci, Connection};
use crate::geom::model::FieldFn;
use crate::geom::tensor::{Slot, Tensor};
use crate::geom::{
    evaluate, orthonormal_frame, Backend, BoxDomain, FrameAtPoint, FrameChoice, JetSource, ManifoldModel,
};
use crate::jet::Jet;
use crate::parallel::{map_points, Execution};

/// Tolerance for the algebraic structure identities.
pub const STRUCTURE_TOL: f64 = 1e-9;
/// Default classification tolerance.
pub const CLASSIFY_TOL: f64 = 1e-6;
/// Random directions per point for the nearly cosymplectic test.
pub const RANDOM_DIRECTIONS: usize = 16;

/// An almost contact metric structure on a chart. Component jets are laid
/// out as `g` (row-major), `φ` (row-major, `φ(∂_j) = φ^i_j ∂_i`), then `ξ`.
#[derive(Clone)]
pub struct AlmostContactStructure {
    pub model: ManifoldModel,
    source: FieldFn,
}

impl fmt::Debug for AlmostContactStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlmostContactStructure")
            .field("model", &self.model)
            .finish()
    }
}

impl AlmostContactStructure {
    /// `fields` maps coordinate jets to the components of `φ` followed by `ξ`.
    pub fn from_model(
        model: ManifoldModel,
        fields: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    ) -> Result<Self> {
        check_odd(model.dim)?;
        let metric = model.clone();
        let source: FieldFn = Arc::new(move |x, order| {
            let mut v = metric.metric_jets(x, order);
            v.extend(fields(&Jet::seeds(x, order)));
            v
        });
        Ok(Self { model, source })
    }

    /// Metric and structure components produced together by `source`.
    pub fn from_source(dim: usize, domain: BoxDomain, source: FieldFn) -> Result<Self> {
        check_odd(dim)?;
        let s = source.clone();
        let model = ManifoldModel::induced(
            dim,
            domain,
            Arc::new(move |x, order| {
                let mut v = s(x, order);
                v.truncate(dim * dim);
                v
            }),
        );
        Ok(Self { model, source })
    }

    /// The same structure with every component passed through `f`.
    pub fn map_components(&self, f: impl Fn(&[f64], Vec<Jet>) -> Vec<Jet> + Send + Sync + 'static) -> Self {
        let src = self.source.clone();
        Self {
            model: self.model.clone(),
            source: Arc::new(move |x, order| f(x, src(x, order))),
        }
    }

    pub fn dim(&self) -> usize {
        self.model.dim
    }

    /// `n` with `dim = 2n + 1`.
    pub fn n(&self) -> usize {
        self.model.dim / 2
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.model.domain
    }

    pub fn at(&self, x: &[f64], backend: Backend) -> Result<StructurePoint> {
        self.at_in_frame(x, backend, FrameChoice::Coordinate)
    }

    pub fn at_in_frame(&self, x: &[f64], backend: Backend, choice: FrameChoice) -> Result<StructurePoint> {
        self.domain().check(x)?;
        StructurePoint::from_components(evaluate(self, x, backend), x, choice)
    }

    /// Validates the algebraic identities at `points`.
    pub fn validate(&self, points: &[Vec<f64>], exec: Execution) -> Result<ValidationReport> {
        let per_point = map_points(points, exec, |x| {
            self.domain().check(x)?;
            let c = self.components(x, 0);
            Ok(structure_violations(&chart_values(&c, self.dim())))
        });
        let mut report = ValidationReport::default();
        for r in per_point {
            report.absorb(&r?);
        }
        Ok(report)
    }
}

fn check_odd(dim: usize) -> Result<()> {
    if dim % 2 == 0 {
        Err(Error::EvenDimension(dim))
    } else {
        Ok(())
    }
}

impl JetSource for AlmostContactStructure {
    fn nvars(&self) -> usize {
        self.model.dim
    }

    fn components(&self, x: &[f64], order: usize) -> Vec<Jet> {
        (self.source)(x, order)
    }
}

/// Chart values of `(g, φ, ξ)`.
#[derive(Debug, Clone)]
pub struct ChartValues {
    pub g: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    pub xi: DVector<f64>,
}

fn chart_values(c: &[Jet], m: usize) -> ChartValues {
    ChartValues {
        g: DMatrix::from_fn(m, m, |i, j| c[i * m + j].value()),
        phi: DMatrix::from_fn(m, m, |i, j| c[m * m + i * m + j].value()),
        xi: DVector::from_fn(m, |i, _| c[2 * m * m + i].value()),
    }
}

/// Maximal violations of the almost contact metric identities.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct ValidationReport {
    pub eta_xi: f64,
    pub phi_xi: f64,
    pub eta_phi: f64,
    pub phi_squared: f64,
    pub compatibility: f64,
}

impl ValidationReport {
    fn absorb(&mut self, o: &ValidationReport) {
        self.eta_xi = self.eta_xi.max(o.eta_xi);
        self.phi_xi = self.phi_xi.max(o.phi_xi);
        self.eta_phi = self.eta_phi.max(o.eta_phi);
        self.phi_squared = self.phi_squared.max(o.phi_squared);
        self.compatibility = self.compatibility.max(o.compatibility);
    }

    pub fn max_violation(&self) -> f64 {
        [
            self.eta_xi,
            self.phi_xi,
            self.eta_phi,
            self.phi_squared,
            self.compatibility,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_violation() < tol
    }

    pub fn require(&self, tol: f64) -> Result<()> {
        if self.passed(tol) {
            Ok(())
        } else {
            Err(Error::InvalidStructure {
                violation: self.max_violation(),
                tol,
            })
        }
    }
}

fn structure_violations(v: &ChartValues) -> ValidationReport {
    let m = v.g.nrows();
    let eta = &v.g * &v.xi;
    let eye = DMatrix::<f64>::identity(m, m);
    ValidationReport {
        eta_xi: (eta.dot(&v.xi) - 1.0).abs(),
        phi_xi: (&v.phi * &v.xi).amax(),
        eta_phi: (eta.transpose() * &v.phi).amax(),
        phi_squared: (&v.phi * &v.phi + &eye - &v.xi * eta.transpose()).amax(),
        compatibility: (v.phi.transpose() * &v.g * &v.phi - &v.g + &eta * eta.transpose()).amax(),
    }
}

/// Everything needed downstream at one point, expressed in an orthonormal
/// frame `E_1, …, E_{2n}, E_{2n+1} = ξ`.
///
/// Derivative slots follow the convention `(∇T)[…, i] = (∇_{E_i}T)[…]` and
/// `(∇²T)[…, j, i] = ∇²_{E_i,E_j}T`.
#[derive(Debug, Clone)]
pub struct StructurePoint {
    pub x: Vec<f64>,
    pub n: usize,
    pub chart: ChartValues,
    pub conn: Connection,
    pub frame: FrameAtPoint,
    /// Trans-Sasakian projections of `∇φ` as chart jets (see [`StructurePoint::fit`]).
    pub alpha_jet: Jet,
    pub beta_jet: Jet,
    pub phi: DMatrix<f64>,
    pub nabla_phi: Tensor<f64>,
    pub nabla_xi: Tensor<f64>,
    pub hess_xi: Tensor<f64>,
    /// `∇̄J = P(∇φ)P` with `P` the orthogonal projection onto `𝒟`.
    pub nabla_bar_j: Tensor<f64>,
    pub hess_bar_j: Tensor<f64>,
    /// `(R(E_i,E_j)E_k)^l` at `[l][k][i][j]`.
    pub riemann: Tensor<f64>,
}

fn jet_matmul(a: &[Jet], b: &[Jet], m: usize) -> Vec<Jet> {
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = a[0].zero_like().truncate(a[0].order().min(b[0].order()));
            for k in 0..m {
                acc += &a[i * m + k] * &b[k * m + j];
            }
            out.push(acc);
        }
    }
    out
}

/// `P T P` applied to the two leading (endomorphism) slots of `t`, for every
/// value of the trailing slots.
fn sandwich(p: &[Jet], t: &Tensor<Jet>) -> Tensor<Jet> {
    let m = t.dim();
    let tail = t.rank() - 2;
    let stride = m.pow(tail as u32);
    let mut data = vec![t.data()[0].clone(); t.data().len()];
    for s in 0..stride {
        let block: Vec<Jet> = (0..m * m).map(|ab| t.data()[ab * stride + s].clone()).collect();
        let out = jet_matmul(&jet_matmul(p, &block, m), p, m);
        for (ab, v) in out.into_iter().enumerate() {
            data[ab * stride + s] = v;
        }
    }
    Tensor::from_vec(m, t.slots().to_vec(), data)
}

impl StructurePoint {
    /// Builds the point data from order-2 component jets `[g, φ, ξ]`.
    pub fn from_components(comps: Vec<Jet>, x: &[f64], choice: FrameChoice) -> Result<Self> {
        let m = x.len();
        check_odd(m)?;
        let chart = chart_values(&comps, m);
        let mut it = comps.into_iter();
        let metric: Vec<Jet> = it.by_ref().take(m * m).collect();
        let phi_c: Vec<Jet> = it.by_ref().take(m * m).collect();
        let xi_c: Vec<Jet> = it.take(m).collect();
        let conn = Connection::new(metric, x)?;

        let phi_t = Tensor::from_vec(m, vec![Slot::Up, Slot::Down], phi_c.clone());
        let xi_t = Tensor::from_vec(m, vec![Slot::Up], xi_c.clone());
        let eta: Vec<Jet> = (0..m)
            .map(|j| {
                let mut acc = xi_c[0].zero_like();
                for k in 0..m {
                    acc += &conn.metric[j * m + k] * &xi_c[k];
                }
                acc
            })
            .collect();
        let p: Vec<Jet> = (0..m * m)
            .map(|ab| {
                let (a, b) = (ab / m, ab % m);
                let d = if a == b { 1.0 } else { 0.0 };
                (&xi_c[a] * &eta[b]).scale(-1.0) + d
            })
            .collect();

        let dphi = conn.nabla(&phi_t);
        let dxi = conn.nabla(&xi_t);
        let hxi = conn.nabla(&dxi);
        let kbar = sandwich(&p, &dphi);
        let hbar = sandwich(&p, &conn.nabla(&kbar));
        let (alpha_jet, beta_jet) = trans_sasakian_projections(&dphi, &phi_c, &xi_c, &eta, &conn);

        let frame = orthonormal_frame(x, &chart.g, Some(&chart.xi), choice)?;
        let (e, einv) = (&frame.vectors, &frame.inverse);
        let to = |t: &Tensor<Jet>| t.values().to_basis(e, einv);
        let phi = to(&phi_t).as_matrix();
        Ok(Self {
            x: x.to_vec(),
            n: m / 2,
            chart,
            alpha_jet,
            beta_jet,
            phi,
            nabla_phi: to(&dphi),
            nabla_xi: to(&dxi),
            hess_xi: to(&hxi),
            nabla_bar_j: to(&kbar),
            hess_bar_j: hbar.values().to_basis(e, einv),
            riemann: conn.riemann().to_basis(e, einv),
            conn,
            frame,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Index of `ξ` in the frame.
    pub fn xi_index(&self) -> usize {
        2 * self.n
    }

    pub fn xi(&self) -> DVector<f64> {
        unit(self.dim(), self.xi_index())
    }

    /// `J = φ|𝒟` extended by zero on `ξ`.
    pub fn j(&self) -> DMatrix<f64> {
        self.phi.clone()
    }

    /// Orthogonal projection onto `𝒟`.
    pub fn projector(&self) -> DMatrix<f64> {
        let mut p = DMatrix::identity(self.dim(), self.dim());
        p[(self.xi_index(), self.xi_index())] = 0.0;
        p
    }

    /// `∇_{E_i}φ`.
    pub fn dphi(&self, i: usize) -> DMatrix<f64> {
        self.nabla_phi.matrix_at(&[i])
    }

    /// `∇_X φ` for a frame vector `X`.
    pub fn dphi_along(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let m = self.dim();
        (0..m).fold(DMatrix::zeros(m, m), |acc, i| acc + self.dphi(i) * x[i])
    }

    /// `∇ξ` as the matrix `X ↦ ∇_Xξ`.
    pub fn dxi(&self) -> DMatrix<f64> {
        self.nabla_xi.as_matrix()
    }

    /// `∇²_{E_i,E_j}ξ`.
    pub fn hess_xi_at(&self, i: usize, j: usize) -> DVector<f64> {
        self.hess_xi.vector_at(&[j, i])
    }

    /// `∇̄_{E_i}J`.
    pub fn kbar(&self, i: usize) -> DMatrix<f64> {
        self.nabla_bar_j.matrix_at(&[i])
    }

    /// `∇̄²_{E_i,E_j}J`.
    pub fn hess_bar_j_at(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.hess_bar_j.matrix_at(&[j, i])
    }

    /// `R(E_i,E_j)` as a matrix.
    pub fn curvature(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.riemann.matrix_at(&[i, j])
    }

    /// `R(X,Y)` for frame vectors.
    pub fn curvature_along(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
        curvature_operator(&self.riemann, x, y)
    }

    /// Ricci form in the frame.
    pub fn ricci(&self) -> DMatrix<f64> {
        ricci(&self.riemann).as_matrix()
    }

    /// Fundamental 2-form `Φ(X,Y) = ⟨X, φY⟩`.
    pub fn fundamental_form(&self) -> DMatrix<f64> {
        self.phi.clone()
    }

    /// `dη(X,Y) = ½(⟨∇_Xξ,Y⟩ − ⟨∇_Yξ,X⟩)`.
    pub fn d_eta(&self) -> DMatrix<f64> {
        let d = self.dxi();
        (d.transpose() - d) * 0.5
    }

    /// `ℛ(Φ)(X,Y) = −½ Σ_i ⟨R(X,Y)E_i, φE_i⟩`.
    pub fn curvature_form(&self) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |a, b| {
            let r = self.curvature(a, b);
            -0.5 * (r.transpose() * &self.phi).trace()
        })
    }

    /// The same form via `Σ_i ⟨R(X,F_i)φF_i, Y⟩` over a frame of `𝒟`.
    pub fn curvature_form_alt(&self) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |a, b| {
            (0..2 * self.n)
                .map(|i| (self.curvature(a, i) * self.phi.column(i))[b])
                .sum()
        })
    }

    /// `ℛ(Φ)♯` with `⟨ℛ(Φ)♯X, Y⟩ = ℛ(Φ)(X,Y)`.
    pub fn curvature_form_endomorphism(&self) -> DMatrix<f64> {
        self.curvature_form().transpose()
    }

    /// `Ric*(X,Y) = ℛ(Φ)(X, φY)`.
    pub fn star_ricci(&self) -> DMatrix<f64> {
        self.curvature_form() * &self.phi
    }

    /// Frame components of `∇α` and `∇β` for the jet projections.
    pub fn grad_alpha(&self) -> DVector<f64> {
        self.frame_gradient(&self.alpha_jet)
    }

    pub fn grad_beta(&self) -> DVector<f64> {
        self.frame_gradient(&self.beta_jet)
    }

    fn frame_gradient(&self, f: &Jet) -> DVector<f64> {
        let d = DVector::from_vec(f.gradient());
        self.frame.vectors.transpose() * d
    }

    /// The model tensors `X ↦ r(ξ,X)` and `X ↦ r(ξ,φX)` stacked as `[a][b][i]`.
    fn trans_sasakian_basis(&self) -> (Tensor<f64>, Tensor<f64>) {
        let m = self.dim();
        let g = DMatrix::identity(m, m);
        let xi = self.xi();
        let slots = vec![Slot::Up, Slot::Down, Slot::Down];
        let a = Tensor::from_fn(m, slots.clone(), |idx| {
            r_operator(&xi, &unit(m, idx[2]), &unit(m, idx[1]), &g)[idx[0]]
        });
        let b = Tensor::from_fn(m, slots, |idx| {
            let px = self.phi.column(idx[2]).into_owned();
            r_operator(&xi, &px, &unit(m, idx[1]), &g)[idx[0]]
        });
        (a, b)
    }

    /// Least-squares fit `∇_Xφ = α r(ξ,X) + β r(ξ,φX)` over the frame.
    pub fn fit(&self) -> TransSasakianFit {
        let (a, b) = self.trans_sasakian_basis();
        let (a, b, d) = (a.data(), b.data(), self.nabla_phi.data());
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
        let gram = Matrix2::new(dot(a, a), dot(a, b), dot(b, a), dot(b, b));
        let rhs = Vector2::new(dot(a, d), dot(b, d));
        let sol = gram.lu().solve(&rhs).unwrap_or_else(Vector2::zeros);
        let residual = (0..d.len())
            .map(|k| (d[k] - sol[0] * a[k] - sol[1] * b[k]).powi(2))
            .sum::<f64>()
            .sqrt();
        TransSasakianFit {
            alpha: sol[0],
            beta: sol[1],
            residual,
            nabla_phi_norm: self.nabla_phi.norm(),
        }
    }
}

/// Unit coordinate vector.
pub fn unit(m: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(m, |k, _| if k == i { 1.0 } else { 0.0 })
}

/// Projections of `∇φ` onto the two trans-Sasakian model tensors, as jets:
/// `4n α = η_a (∇φ)^a_{b,i} g^{bi} − (∇φ)^a_{b,a} ξ^b` and
/// `4n β = η_a (∇φ)^a_{b,i} φ^b_j g^{ji} − ξ^b (∇φ)^a_{b,i} g_{ac} φ^c_j g^{ji}`.
/// For a valid structure the model tensors are orthogonal with squared norm
/// `4n`, so these coincide with the least-squares fit.
fn trans_sasakian_projections(
    dphi: &Tensor<Jet>,
    phi: &[Jet],
    xi: &[Jet],
    eta: &[Jet],
    conn: &Connection,
) -> (Jet, Jet) {
    let m = dphi.dim();
    let n = (m / 2) as f64;
    let g = &conn.metric;
    let gi = &conn.inverse;
    let zero = dphi.data()[0].zero_like();
    // φ^b_j g^{ji}
    let phi_up = jet_matmul(phi, gi, m);
    // g_ac φ^c_j g^{ji}
    let phi_low_up = jet_matmul(g, &phi_up, m);
    let mut alpha = zero.clone();
    let mut beta = zero;
    for a in 0..m {
        for b in 0..m {
            for i in 0..m {
                let d = dphi.get(&[a, b, i]);
                let ed = &eta[a] * d;
                alpha += &ed * &gi[b * m + i];
                beta += &ed * &phi_up[b * m + i];
                beta -= &(&xi[b] * d) * &phi_low_up[a * m + i];
            }
            alpha -= dphi.get(&[a, b, a]) * &xi[b];
        }
    }
    (alpha.scale(1.0 / (4.0 * n)), beta.scale(1.0 / (4.0 * n)))
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct TransSasakianFit {
    pub alpha: f64,
    pub beta: f64,
    pub residual: f64,
    pub nabla_phi_norm: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq, Eq)]
pub struct StructureFlags {
    pub cosymplectic: bool,
    pub contact_metric: bool,
    #[serde(rename = "K_contact")]
    pub k_contact: bool,
    pub sasakian: bool,
    pub alpha_sasakian: bool,
    pub beta_kenmotsu: bool,
    pub trans_sasakian: bool,
    pub nearly_cosymplectic: bool,
    pub nearly_sasakian: bool,
}

/// Per-point classification data.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PointClassification {
    pub point: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub fit_residual: f64,
    pub nabla_phi_norm: f64,
    pub contact_defect: f64,
    pub xi_symmetric_defect: f64,
    pub nearly_cosymplectic_defect: f64,
    pub nearly_sasakian_defect: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FitSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl FitSummary {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let count = values.clone().count().max(1) as f64;
        Self {
            mean: values.clone().sum::<f64>() / count,
            min: values.clone().fold(f64::INFINITY, f64::min),
            max: values.fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Largest distance of any sample from `v`.
    pub fn deviation_from(&self, v: f64) -> f64 {
        (self.max - v).abs().max((self.min - v).abs())
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StructureClassification {
    pub flags: StructureFlags,
    pub tol: f64,
    pub alpha: FitSummary,
    pub beta: FitSummary,
    pub max_fit_residual: f64,
    pub per_point: Vec<PointClassification>,
}

/// `|∇_Xφ(X)|` over the frame vectors and seeded random unit directions.
pub fn nearly_cosymplectic_defect(p: &StructurePoint, rng: &mut impl Rng) -> f64 {
    let m = p.dim();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        worst = worst.max((p.dphi(i) * unit(m, i)).amax());
    }
    for _ in 0..RANDOM_DIRECTIONS {
        let v = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let v = &v / v.norm();
        worst = worst.max((p.dphi_along(&v) * &v).amax());
    }
    worst
}

/// `(∇_Xφ)Y + (∇_Yφ)X − 2g(X,Y)ξ + η(Y)X + η(X)Y` over frame pairs.
pub fn nearly_sasakian_defect(p: &StructurePoint) -> f64 {
    let m = p.dim();
    let xi = p.xi();
    let k = p.xi_index();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in i..m {
            let (ei, ej) = (unit(m, i), unit(m, j));
            let mut v = p.dphi(i) * &ej + p.dphi(j) * &ei;
            if i == j {
                v -= &xi * 2.0;
            }
            if j == k {
                v += &ei;
            }
            if i == k {
                v += &ej;
            }
            worst = worst.max(v.amax());
        }
    }
    worst
}

fn classify_point(p: &StructurePoint, seed: u64) -> PointClassification {
    let fit = p.fit();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = p.dxi();
    PointClassification {
        point: p.x.clone(),
        alpha: fit.alpha,
        beta: fit.beta,
        fit_residual: fit.residual,
        nabla_phi_norm: fit.nabla_phi_norm,
        contact_defect: (p.d_eta() - p.fundamental_form()).amax(),
        xi_symmetric_defect: ((&d + d.transpose()) * 0.5).amax(),
        nearly_cosymplectic_defect: nearly_cosymplectic_defect(p, &mut rng),
        nearly_sasakian_defect: nearly_sasakian_defect(p),
    }
}

/// Classifies the structure from its values at `points`.
pub fn classify(
    s: &AlmostContactStructure,
    points: &[Vec<f64>],
    tol: f64,
    backend: Backend,
    exec: Execution,
) -> Result<StructureClassification> {
    let indexed: Vec<Vec<f64>> = points.to_vec();
    let results = map_points(&indexed, exec, |x| {
        let p = s.at(x, backend)?;
        let idx = points.iter().position(|q| q.as_slice() == x).unwrap_or(0) as u64;
        Ok(classify_point(&p, 0x5eed_0000 + idx))
    });
    let per_point: Vec<PointClassification> = results.into_iter().collect::<Result<_>>()?;
    Ok(summarize(per_point, tol))
}

fn summarize(per_point: Vec<PointClassification>, tol: f64) -> StructureClassification {
    let all = |f: &dyn Fn(&PointClassification) -> bool| per_point.iter().all(f);
    let any = |f: &dyn Fn(&PointClassification) -> bool| per_point.iter().any(f);
    let trans = all(&|p| p.fit_residual < tol * (1.0 + p.nabla_phi_norm));
    let alpha_zero = all(&|p| p.alpha.abs() < tol);
    let beta_zero = all(&|p| p.beta.abs() < tol);
    let contact = all(&|p| p.contact_defect < tol);
    let flags = StructureFlags {
        cosymplectic: all(&|p| p.nabla_phi_norm < tol),
        contact_metric: contact,
        k_contact: contact && all(&|p| p.xi_symmetric_defect < tol),
        sasakian: trans && beta_zero && all(&|p| (p.alpha - 1.0).abs() < tol),
        alpha_sasakian: trans && beta_zero && any(&|p| p.alpha.abs() >= tol),
        beta_kenmotsu: trans && alpha_zero && any(&|p| p.beta.abs() >= tol),
        trans_sasakian: trans,
        nearly_cosymplectic: all(&|p| p.nearly_cosymplectic_defect < tol),
        nearly_sasakian: all(&|p| p.nearly_sasakian_defect < tol),
    };
    StructureClassification {
        flags,
        tol,
        alpha: FitSummary::of(per_point.iter().map(|p| p.alpha)),
        beta: FitSummary::of(per_point.iter().map(|p| p.beta)),
        max_fit_residual: per_point.iter().map(|p| p.fit_residual).fold(0.0, f64::max),
        per_point,
    }
}

/// Maximal residuals of the trans-Sasakian identities.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct TransSasakianReport {
    /// `∇_Xξ = −αφX − βφ²X`.
    pub nabla_xi: f64,
    /// `R(X,Y)ξ = φr(X,Y)∇α + φ²r(X,Y)∇β + (α²−β²)r(X,Y)ξ + 2αβφr(X,Y)ξ`.
    pub curvature_xi: f64,
    /// `Ric(ξ) = φ∇α − φ²∇β − 2n∇β + 2n(α²−β²)ξ`.
    pub ricci_xi: f64,
    /// `ℛ(Φ)♯ξ = φ²∇α − φ∇β`.
    pub curvature_form_first: f64,
    /// `ℛ(Φ)♯ξ = −φ²∇α − φ∇β − 2n∇α − 4nαβξ`.
    pub curvature_form_second: f64,
    /// `dα(ξ) + 2αβ`.
    pub d_alpha_xi: f64,
    /// `|αβ|` (only meaningful in dimension ≥ 5).
    pub alpha_beta: f64,
    /// `|∇α|` (only meaningful in dimension ≥ 5).
    pub grad_alpha: f64,
    /// `∇*∇ξ = φ∇α + φ²∇β + 2n(α²+β²)ξ`.
    pub laplacian_xi: f64,
    /// Agreement of the two evaluations of `ℛ(Φ)`.
    pub curvature_form_forms: f64,
}

impl TransSasakianReport {
    fn absorb(&mut self, o: &TransSasakianReport) {
        macro_rules! mx {
            ($($f:ident),*) => { $( self.$f = self.$f.max(o.$f); )* };
        }
        mx!(
            nabla_xi,
            curvature_xi,
            ricci_xi,
            curvature_form_first,
            curvature_form_second,
            d_alpha_xi,
            alpha_beta,
            grad_alpha,
            laplacian_xi,
            curvature_form_forms
        );
    }

    /// Largest residual among the identities that hold in every dimension.
    pub fn max_general(&self) -> f64 {
        [
            self.nabla_xi,
            self.curvature_xi,
            self.ricci_xi,
            self.curvature_form_first,
            self.curvature_form_second,
            self.d_alpha_xi,
            self.laplacian_xi,
            self.curvature_form_forms,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Evaluates the trans-Sasakian identities at one point using the pointwise
/// fit and the gradients of the fitted functions.
pub fn trans_sasakian_point(p: &StructurePoint) -> TransSasakianReport {
    let m = p.dim();
    let n = p.n as f64;
    let fit = p.fit();
    let (a, b) = (fit.alpha, fit.beta);
    let phi = &p.phi;
    let phi2 = phi * phi;
    let ga = p.grad_alpha();
    let gb = p.grad_beta();
    let xi = p.xi();
    let g = DMatrix::identity(m, m);

    let nabla_xi = (p.dxi() + phi * a + &phi2 * b).amax();

    let mut curvature_xi: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let (x, y) = (unit(m, i), unit(m, j));
            let lhs = p.curvature(i, j) * &xi;
            let rx = r_operator(&x, &y, &xi, &g);
            let rhs = phi * r_operator(&x, &y, &ga, &g)
                + &phi2 * r_operator(&x, &y, &gb, &g)
                + &rx * (a * a - b * b)
                + phi * &rx * (2.0 * a * b);
            curvature_xi = curvature_xi.max((lhs - rhs).amax());
        }
    }

    let ric_xi = p.ricci().column(p.xi_index()).into_owned();
    let ricci_xi = (ric_xi - (phi * &ga - &phi2 * &gb - &gb * (2.0 * n) + &xi * (2.0 * n * (a * a - b * b)))).amax();

    let rphi_xi = p.curvature_form_endomorphism() * &xi;
    let first = &phi2 * &ga - phi * &gb;
    let second = -(&phi2 * &ga) - phi * &gb - &ga * (2.0 * n) - &xi * (4.0 * n * a * b);

    let lap = -(0..m).fold(DVector::zeros(m), |acc, i| acc + p.hess_xi_at(i, i));
    let lap_rhs = phi * &ga + &phi2 * &gb + &xi * (2.0 * n * (a * a + b * b));

    TransSasakianReport {
        nabla_xi,
        curvature_xi,
        ricci_xi,
        curvature_form_first: (&rphi_xi - first).amax(),
        curvature_form_second: (&rphi_xi - second).amax(),
        d_alpha_xi: (ga[p.xi_index()] + 2.0 * a * b).abs(),
        alpha_beta: (a * b).abs(),
        grad_alpha: ga.norm(),
        laplacian_xi: (lap - lap_rhs).amax(),
        curvature_form_forms: (p.curvature_form() - p.curvature_form_alt()).amax(),
    }
}

pub fn trans_sasakian_identities(
    s: &AlmostContactStructure,
    points: &[Vec<f64>],
    backend: Backend,
    exec: Execution,
) -> Result<TransSasakianReport> {
    let results = map_points(points, exec, |x| Ok(trans_sasakian_point(&s.at(x, backend)?)));
    let mut report = TransSasakianReport::default();
    for r in results {
        report.absorb(&r?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Flat ℝ³ with φ∂x = ∂y, φ∂y = −∂x, ξ = ∂z.
    fn flat3() -> AlmostContactStructure {
        let model = ManifoldModel::flat(3, BoxDomain::cube(3, 1.0));
        AlmostContactStructure::from_model(model, |x| {
            let c = |v: f64| x[0].lift_const(v);
            vec![
                c(0.0),
                c(-1.0),
                c(0.0),
                c(1.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(1.0),
            ]
        })
        .unwrap()
    }

    #[test]
    fn flat_structure_is_cosymplectic() {
        let s = flat3();
        let pts = s.domain().sample(4, 1);
        assert_eq!(s.validate(&pts, Execution::Sequential).unwrap().max_violation(), 0.0);
        let c = classify(&s, &pts, CLASSIFY_TOL, Backend::Jet, Execution::Sequential).unwrap();
        assert!(c.flags.cosymplectic && c.flags.trans_sasakian && c.flags.nearly_cosymplectic);
        assert!(!c.flags.contact_metric && !c.flags.sasakian);
        assert!(c.alpha.deviation_from(0.0) < 1e-12 && c.beta.deviation_from(0.0) < 1e-12);
        let p = s.at(&pts[0], Backend::Jet).unwrap();
        assert_eq!(p.star_ricci().amax(), 0.0);
        assert_eq!(
            p.fundamental_form(),
            DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn corrupted_phi_is_flagged() {
        let s = flat3().map_components(|_, mut c| {
            c[9 + 1] = &c[9 + 1] + 1e-3;
            c
        });
        let pts = s.domain().sample(3, 2);
        let r = s.validate(&pts, Execution::Sequential).unwrap();
        assert!((r.phi_squared - 1e-3).abs() < 1e-12);
        assert!(r.max_violation() > 5e-4 && r.max_violation() < 3e-3);
        assert!(matches!(r.require(STRUCTURE_TOL), Err(Error::InvalidStructure { .. })));
    }

    #[test]
    fn even_dimension_is_rejected() {
        let model = ManifoldModel::flat(2, BoxDomain::cube(2, 1.0));
        assert!(matches!(
            AlmostContactStructure::from_model(model, |_| vec![]),
            Err(Error::EvenDimension(2))
        ));
    }
}
