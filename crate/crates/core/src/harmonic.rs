//! Harmonic-section residuals and harmonic-map obstruction forms of an
//! almost contact metric structure.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::acs::{unit, AlmostContactStructure, StructurePoint};
use crate::error::Result;
use crate::geom::curvature::r_operator;
use crate::geom::Backend;
use crate::parallel::{map_points, Execution};

/// Default verdict tolerance for the jet backend.
pub const JET_TOL: f64 = 1e-6;
/// Default verdict tolerance for the finite-difference backend.
pub const FD_TOL: f64 = 5e-3;

pub fn default_tol(backend: Backend) -> f64 {
    match backend {
        Backend::Jet => JET_TOL,
        Backend::Fd => FD_TOL,
    }
}

/// Pointwise harmonicity quantities in the structure's orthonormal frame.
#[derive(Debug, Clone)]
pub struct HarmonicQuantities {
    /// `∇*∇ξ = −Σ ∇²_{E_i,E_i}ξ`.
    pub rough_laplacian_xi: DVector<f64>,
    pub grad_xi_sq: f64,
    /// `∇*∇ξ − |∇ξ|²ξ`.
    pub xi_residual: DVector<f64>,
    /// `∇̄*∇̄J = −Σ ∇̄²_{E_i,E_i}J`.
    pub rough_laplacian_j: DMatrix<f64>,
    /// `τ̄(J) = ¼[∇̄*∇̄J, J]`.
    pub tau_bar: DMatrix<f64>,
    /// `T(φ) = Σ ∇̄_{E_i}J(∇_{E_i}ξ)`.
    pub t_phi: DVector<f64>,
    /// `∇*∇ξ − |∇ξ|²ξ + ½JT(φ)`.
    pub section_residual: DVector<f64>,
    /// `⟨ψ₁,Ψ₁⟩(E_c) = ¼ Σ_{i,j} ⟨R(E_i,E_c)F_j, J∇̄_{E_i}J(F_j)⟩`.
    pub form1: DVector<f64>,
    /// `⟨ψ₂,Ψ₂⟩(E_c) = Σ_i ⟨R(E_i,E_c)ξ, ∇_{E_i}ξ⟩`.
    pub form2: DVector<f64>,
    /// `⟨ψ̄,Ψ̄⟩(E_c) = ¼ Σ_{i,j} ⟨R̄(E_i,E_c)F_j, J∇̄_{E_i}J(F_j)⟩` with
    /// `R̄ = R_𝒟 + r(∇ξ,∇ξ)`.
    pub twistor_form: DVector<f64>,
    /// `form1 − ⟨ψ̄,Ψ̄⟩ − ½⟨JT(φ), ∇_Xξ⟩`.
    pub twistor_identity: DVector<f64>,
    /// `|∇̄J|`.
    pub nabla_bar_j_norm: f64,
    /// `max_i |∇̄_{E_i}J|`.
    pub kahler_bundle_defect: f64,
}

impl HarmonicQuantities {
    pub fn compute(p: &StructurePoint) -> Self {
        let m = p.dim();
        let d = 2 * p.n;
        let xi = p.xi();
        let j = p.j();
        let dxi = p.dxi();

        let lap_xi = -(0..m).fold(DVector::zeros(m), |acc, i| acc + p.hess_xi_at(i, i));
        let grad_xi_sq = dxi.norm_squared();
        let xi_residual = &lap_xi - &xi * grad_xi_sq;

        let lap_j = -(0..m).fold(DMatrix::zeros(m, m), |acc, i| acc + p.hess_bar_j_at(i, i));
        let tau_bar = (&lap_j * &j - &j * &lap_j) * 0.25;

        let kbar: Vec<DMatrix<f64>> = (0..m).map(|i| p.kbar(i)).collect();
        let t_phi = (0..m).fold(DVector::zeros(m), |acc, i| acc + &kbar[i] * dxi.column(i));
        let section_residual = &xi_residual + &j * &t_phi * 0.5;

        let g = DMatrix::identity(m, m);
        let proj = p.projector();
        let mut form1 = DVector::zeros(m);
        let mut form2 = DVector::zeros(m);
        let mut twistor = DVector::zeros(m);
        for c in 0..m {
            let dxi_c = dxi.column(c).into_owned();
            let (mut f1, mut f2, mut tw) = (0.0, 0.0, 0.0);
            for i in 0..m {
                let r = p.curvature(i, c);
                let jk = &j * &kbar[i];
                let dxi_i = dxi.column(i).into_owned();
                f2 += (&r * &xi).dot(&dxi_i);
                for fj in 0..d {
                    let f = unit(m, fj);
                    let target = &jk * &f;
                    let rf = &r * &f;
                    f1 += rf.dot(&target);
                    let rbar = &proj * &rf + r_operator(&dxi_i, &dxi_c, &f, &g);
                    tw += rbar.dot(&target);
                }
            }
            form1[c] = 0.25 * f1;
            form2[c] = f2;
            twistor[c] = 0.25 * tw;
        }
        let jt = &j * &t_phi;
        let twistor_identity = DVector::from_fn(m, |c, _| form1[c] - twistor[c] - 0.5 * jt.dot(&dxi.column(c)));

        let kahler_bundle_defect = kbar.iter().map(|k| k.norm()).fold(0.0, f64::max);
        Self {
            rough_laplacian_xi: lap_xi,
            grad_xi_sq,
            xi_residual,
            rough_laplacian_j: lap_j,
            tau_bar,
            t_phi,
            section_residual,
            form1,
            form2,
            twistor_form: twistor,
            twistor_identity,
            nabla_bar_j_norm: p.nabla_bar_j.norm(),
            kahler_bundle_defect,
        }
    }

    /// Verdict scale `1 + |∇ξ|² + |∇̄J|²`.
    pub fn scale(&self) -> f64 {
        1.0 + self.grad_xi_sq + self.nabla_bar_j_norm * self.nabla_bar_j_norm
    }

    /// `⟨ψ,Ψ⟩ = form1 + form2`.
    pub fn total_form(&self) -> DVector<f64> {
        &self.form1 + &self.form2
    }
}

/// One row of a harmonicity report.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HarmonicPoint {
    pub point: Vec<f64>,
    pub xi_residual_norm: f64,
    pub tau_bar_norm: f64,
    #[serde(rename = "T_phi_norm")]
    pub t_phi_norm: f64,
    pub section_residual_norm: f64,
    pub form1_norm: f64,
    pub form2_norm: f64,
    pub form_norm: f64,
    pub kahler_bundle_defect: f64,
    pub twistor_form_norm: f64,
    pub twistor_identity_residual: f64,
    pub rough_laplacian_xi_norm: f64,
    pub grad_xi_sq: f64,
    pub scale: f64,
}

impl HarmonicPoint {
    pub fn from_quantities(point: &[f64], q: &HarmonicQuantities) -> Self {
        Self {
            point: point.to_vec(),
            xi_residual_norm: q.xi_residual.norm(),
            tau_bar_norm: q.tau_bar.norm(),
            t_phi_norm: q.t_phi.norm(),
            section_residual_norm: q.section_residual.norm(),
            form1_norm: q.form1.norm(),
            form2_norm: q.form2.norm(),
            form_norm: q.total_form().norm(),
            kahler_bundle_defect: q.kahler_bundle_defect,
            twistor_form_norm: q.twistor_form.norm(),
            twistor_identity_residual: q.twistor_identity.amax(),
            rough_laplacian_xi_norm: q.rough_laplacian_xi.norm(),
            grad_xi_sq: q.grad_xi_sq,
            scale: q.scale(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct HarmonicMaxima {
    pub xi_residual_norm: f64,
    pub tau_bar_norm: f64,
    #[serde(rename = "T_phi_norm")]
    pub t_phi_norm: f64,
    pub section_residual_norm: f64,
    pub form1_norm: f64,
    pub form2_norm: f64,
    pub form_norm: f64,
    pub kahler_bundle_defect: f64,
    pub twistor_identity_residual: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq, Eq)]
pub struct HarmonicVerdicts {
    pub xi_harmonic: bool,
    /// `ξ` harmonic and `⟨ψ₂,Ψ₂⟩ = 0`: `ξ` is a harmonic map into the unit sphere bundle.
    pub xi_harmonic_map: bool,
    #[serde(rename = "J_harmonic")]
    pub j_harmonic: bool,
    pub harmonic_section: bool,
    pub harmonic_map: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HarmonicityReport {
    pub tol: f64,
    pub per_point: Vec<HarmonicPoint>,
    pub maxima: HarmonicMaxima,
    pub verdicts: HarmonicVerdicts,
}

impl HarmonicityReport {
    pub fn from_points(per_point: Vec<HarmonicPoint>, tol: f64) -> Self {
        let mx = |f: fn(&HarmonicPoint) -> f64| per_point.iter().map(f).fold(0.0, f64::max);
        let maxima = HarmonicMaxima {
            xi_residual_norm: mx(|p| p.xi_residual_norm),
            tau_bar_norm: mx(|p| p.tau_bar_norm),
            t_phi_norm: mx(|p| p.t_phi_norm),
            section_residual_norm: mx(|p| p.section_residual_norm),
            form1_norm: mx(|p| p.form1_norm),
            form2_norm: mx(|p| p.form2_norm),
            form_norm: mx(|p| p.form_norm),
            kahler_bundle_defect: mx(|p| p.kahler_bundle_defect),
            twistor_identity_residual: mx(|p| p.twistor_identity_residual),
        };
        let ok = |f: fn(&HarmonicPoint) -> f64| per_point.iter().all(|p| f(p) < tol * p.scale);
        let xi_harmonic = ok(|p| p.xi_residual_norm);
        let j_harmonic = ok(|p| p.tau_bar_norm);
        let harmonic_section = j_harmonic && ok(|p| p.section_residual_norm);
        let verdicts = HarmonicVerdicts {
            xi_harmonic,
            xi_harmonic_map: xi_harmonic && ok(|p| p.form2_norm),
            j_harmonic,
            harmonic_section,
            harmonic_map: harmonic_section && ok(|p| p.form1_norm) && ok(|p| p.form2_norm),
        };
        Self {
            tol,
            per_point,
            maxima,
            verdicts,
        }
    }
}

/// Evaluates every harmonicity quantity at `points`.
pub fn harmonicity(
    s: &AlmostContactStructure,
    points: &[Vec<f64>],
    tol: f64,
    backend: Backend,
    exec: Execution,
) -> Result<HarmonicityReport> {
    let rows = map_points(points, exec, |x| {
        let p = s.at(x, backend)?;
        Ok(HarmonicPoint::from_quantities(x, &HarmonicQuantities::compute(&p)))
    });
    let per_point = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(HarmonicityReport::from_points(per_point, tol))
}
