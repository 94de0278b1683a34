//! Named example structures with their expected harmonicity verdicts.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use serde::Serialize;

use crate::acs::AlmostContactStructure;
use crate::error::{Error, Result};
use crate::geom::{BoxDomain, ManifoldModel};
use crate::harmonic::HarmonicVerdicts;
use crate::hyper::{AlmostHermitian, ComplexStructureFn, HypersurfaceModel};
use crate::jet::Jet;

pub const IDS: [&str; 8] = [
    "sasakian-sphere",
    "kenmotsu-warped",
    "cosymplectic-flat",
    "nil3",
    "ellipsoid-c2",
    "nearly-cosymplectic-s5",
    "nearly-sasakian-s5",
    "product-line",
];

/// Builder parameters. Unset fields take per-model defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Params {
    /// Half the dimension of `𝒟`.
    pub n: Option<usize>,
    /// Ellipsoid semi-axis.
    pub a: Option<f64>,
    /// Warping rate of the Kenmotsu chart.
    pub c: Option<f64>,
    /// Base model of `product-line`.
    pub base: Option<String>,
}

/// Fully resolved parameters, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<ResolvedParams>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_id: Option<String>,
}

/// Expected value of a verdict: fixed, or equal to the corresponding
/// verdict for the characteristic field alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expected {
    Fixed(bool),
    FollowsXi,
}

impl Expected {
    /// Resolves against computed verdicts; `xi` is the characteristic-field verdict.
    pub fn resolve(self, xi: bool) -> bool {
        match self {
            Expected::Fixed(v) => v,
            Expected::FollowsXi => xi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExpectedVerdicts {
    pub harmonic_section: Expected,
    pub harmonic_map: Expected,
}

impl ExpectedVerdicts {
    const fn fixed(section: bool, map: bool) -> Self {
        Self {
            harmonic_section: Expected::Fixed(section),
            harmonic_map: Expected::Fixed(map),
        }
    }

    const FOLLOWS_XI: Self = Self {
        harmonic_section: Expected::FollowsXi,
        harmonic_map: Expected::FollowsXi,
    };

    /// `(section, map)` expected for the computed verdicts `v`.
    pub fn resolve(&self, v: &HarmonicVerdicts) -> (bool, bool) {
        (
            self.harmonic_section.resolve(v.xi_harmonic),
            self.harmonic_map.resolve(v.xi_harmonic_map),
        )
    }
}

/// Catalog metadata for `list`.
#[derive(Debug, Clone, Serialize)]
pub struct EntryInfo {
    pub id: &'static str,
    pub description: &'static str,
    pub params: &'static str,
    pub expected: ExpectedVerdicts,
    /// Why the expectation holds.
    pub basis: &'static str,
    /// Classification flags expected to be set.
    pub flags: &'static [&'static str],
}

pub fn entries() -> Vec<EntryInfo> {
    vec![
        EntryInfo {
            id: "sasakian-sphere",
            description: "unit sphere S^(2n+1) in C^(n+1) with the structure induced by the outward normal",
            params: "n (default 1)",
            expected: ExpectedVerdicts::fixed(true, true),
            basis: "Sasakian structures are harmonic maps",
            flags: &["sasakian", "contact_metric", "K_contact", "trans_sasakian"],
        },
        EntryInfo {
            id: "kenmotsu-warped",
            description: "R^(2n+1) with g = dt^2 + e^(2ct)(dx^2 + dy^2), xi = d/dt",
            params: "n (default 1), c (default 1)",
            expected: ExpectedVerdicts::fixed(true, false),
            basis: "Kenmotsu structures are harmonic sections but never harmonic maps",
            flags: &["beta_kenmotsu", "trans_sasakian"],
        },
        EntryInfo {
            id: "cosymplectic-flat",
            description: "flat R^(2n+1) with constant phi and xi",
            params: "n (default 1)",
            expected: ExpectedVerdicts::fixed(true, true),
            basis: "parallel structure",
            flags: &["cosymplectic", "trans_sasakian", "nearly_cosymplectic"],
        },
        EntryInfo {
            id: "nil3",
            description: "Heisenberg group with eta = dz - y dx, g = dx^2 + dy^2 + eta^2",
            params: "none",
            expected: ExpectedVerdicts::FOLLOWS_XI,
            basis: "D is a Kahler bundle in dimension 3, so the verdicts reduce to those of xi",
            flags: &[],
        },
        EntryInfo {
            id: "ellipsoid-c2",
            description: "ellipsoid x1^2/a^2 + x2^2 + x3^2 + x4^2 = 1 in C^2",
            params: "a (default 1.5)",
            expected: ExpectedVerdicts::FOLLOWS_XI,
            basis: "hypersurfaces of Kahler manifolds have D a Kahler bundle, so the verdicts reduce to those of xi",
            flags: &[],
        },
        EntryInfo {
            id: "nearly-cosymplectic-s5",
            description: "equator S^5 of the nearly Kahler S^6",
            params: "none",
            expected: ExpectedVerdicts::fixed(true, true),
            basis: "the nearly cosymplectic 5-sphere is a harmonic map",
            flags: &["nearly_cosymplectic"],
        },
        EntryInfo {
            id: "nearly-sasakian-s5",
            description: "sphere <p, e7> = 1/sqrt(2) of radius 1/sqrt(2) in the nearly Kahler S^6",
            params: "none",
            expected: ExpectedVerdicts::fixed(false, false),
            basis: "only the totally geodesic round hypersphere of S^6 is harmonic",
            flags: &["nearly_sasakian"],
        },
        EntryInfo {
            id: "product-line",
            description: "slice t = 0 of M x R with its canonical almost Hermitian structure",
            params: "base (default sasakian-sphere) plus the base parameters",
            expected: ExpectedVerdicts::FOLLOWS_XI,
            basis: "the slice carries the base structure; expectations are those of the base",
            flags: &[],
        },
    ]
}

pub fn info(id: &str) -> Result<EntryInfo> {
    entries()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownModel(id.to_string()))
}

/// Expected verdicts for `id`, following `base` for `product-line`.
pub fn expected_verdicts(id: &str, params: &Params) -> Result<ExpectedVerdicts> {
    if id == "product-line" {
        let base = product_base(params)?;
        return info(&base).map(|e| e.expected);
    }
    info(id).map(|e| e.expected)
}

/// Classification flags expected for `id`.
pub fn expected_flags(id: &str, params: &Params) -> Result<&'static [&'static str]> {
    if id == "product-line" {
        let base = product_base(params)?;
        return info(&base).map(|e| e.flags);
    }
    info(id).map(|e| e.flags)
}

fn product_base(params: &Params) -> Result<String> {
    let base = params.base.clone().unwrap_or_else(|| "sasakian-sphere".to_string());
    if base == "product-line" {
        return Err(Error::InvalidParameter("product-line cannot be its own base".into()));
    }
    info(&base)?;
    Ok(base)
}

/// A built catalog model.
#[derive(Debug, Clone)]
pub enum Model {
    Structure(AlmostContactStructure),
    Hypersurface(Box<HypersurfaceModel>),
}

impl Model {
    pub fn structure(&self) -> &AlmostContactStructure {
        match self {
            Model::Structure(s) => s,
            Model::Hypersurface(h) => h.induce_structure(),
        }
    }

    pub fn hypersurface(&self) -> Option<&HypersurfaceModel> {
        match self {
            Model::Structure(_) => None,
            Model::Hypersurface(h) => Some(h),
        }
    }
}

fn check_n(n: usize) -> Result<usize> {
    if n == 0 {
        Err(Error::InvalidParameter("n must be at least 1".into()))
    } else {
        Ok(n)
    }
}

fn check_positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn reject(params: &Params, allowed: &[&str], id: &str) -> Result<()> {
    let given = [
        ("n", params.n.is_some()),
        ("a", params.a.is_some()),
        ("c", params.c.is_some()),
        ("base", params.base.is_some()),
    ];
    for (name, set) in given {
        if set && !allowed.contains(&name) {
            return Err(Error::InvalidParameter(format!(
                "{id} does not take parameter `{name}`"
            )));
        }
    }
    Ok(())
}

/// Fills in defaults for `id`.
pub fn resolve_params(id: &str, params: &Params) -> Result<ResolvedParams> {
    let none = ResolvedParams {
        n: None,
        a: None,
        c: None,
        base: None,
        base_id: None,
    };
    Ok(match id {
        "sasakian-sphere" | "cosymplectic-flat" => {
            reject(params, &["n"], id)?;
            ResolvedParams {
                n: Some(check_n(params.n.unwrap_or(1))?),
                ..none
            }
        }
        "kenmotsu-warped" => {
            reject(params, &["n", "c"], id)?;
            ResolvedParams {
                n: Some(check_n(params.n.unwrap_or(1))?),
                c: Some(check_positive("c", params.c.unwrap_or(1.0))?),
                ..none
            }
        }
        "ellipsoid-c2" => {
            reject(params, &["a"], id)?;
            ResolvedParams {
                a: Some(check_positive("a", params.a.unwrap_or(1.5))?),
                ..none
            }
        }
        "nil3" | "nearly-cosymplectic-s5" | "nearly-sasakian-s5" => {
            reject(params, &[], id)?;
            none
        }
        "product-line" => {
            let base = product_base(params)?;
            let inner = Params {
                base: None,
                ..params.clone()
            };
            ResolvedParams {
                base: Some(Box::new(resolve_params(&base, &inner)?)),
                base_id: Some(base),
                ..none
            }
        }
        other => return Err(Error::UnknownModel(other.to_string())),
    })
}

/// Builds the model `id`.
pub fn build(id: &str, params: &Params) -> Result<Model> {
    let r = resolve_params(id, params)?;
    Ok(match id {
        "sasakian-sphere" => Model::Hypersurface(Box::new(sasakian_sphere(r.n.unwrap_or(1))?)),
        "kenmotsu-warped" => Model::Structure(kenmotsu_warped(r.n.unwrap_or(1), r.c.unwrap_or(1.0))?),
        "cosymplectic-flat" => Model::Structure(cosymplectic_flat(r.n.unwrap_or(1))?),
        "nil3" => Model::Structure(nil3()?),
        "ellipsoid-c2" => Model::Hypersurface(Box::new(ellipsoid_c2(r.a.unwrap_or(1.5))?)),
        "nearly-cosymplectic-s5" => Model::Hypersurface(Box::new(six_sphere_slice(0.0, 1.0)?)),
        "nearly-sasakian-s5" => Model::Hypersurface(Box::new(six_sphere_slice(FRAC_PI_4, -1.0)?)),
        "product-line" => {
            let base_id = r.base_id.as_deref().unwrap_or("sasakian-sphere");
            let inner = Params {
                base: None,
                ..params.clone()
            };
            let base = build(base_id, &inner)?;
            Model::Hypersurface(Box::new(HypersurfaceModel::product_with_line(base.structure(), 0.5)?))
        }
        other => return Err(Error::UnknownModel(other.to_string())),
    })
}

/// Inverse stereographic projection `ℝᵏ → Sᵏ ⊂ ℝᵏ⁺¹` from the last pole.
pub fn inverse_stereographic(u: &[Jet]) -> Vec<Jet> {
    let r2 = u.iter().fold(u[0].zero_like(), |acc, v| acc + v * v);
    let d = (&r2 + 1.0).recip();
    let mut out: Vec<Jet> = u.iter().map(|v| v * &d * 2.0).collect();
    out.push((-&r2 + 1.0) * &d);
    out
}

/// Standard complex structure on `ℂᵏ = ℝ²ᵏ`: `J e_{2i} = e_{2i+1}`.
pub fn standard_complex() -> ComplexStructureFn {
    Arc::new(|_, v| {
        (0..v.len())
            .map(|a| if a % 2 == 0 { -&v[a + 1] } else { v[a - 1].clone() })
            .collect()
    })
}

/// Imaginary octonion multiplication `e_i e_j = e_k` on the lines of the Fano plane.
const FANO: [[usize; 3]; 7] = [
    [1, 2, 3],
    [1, 4, 5],
    [1, 7, 6],
    [2, 4, 6],
    [2, 5, 7],
    [3, 4, 7],
    [3, 6, 5],
];

/// `(i, j) ↦ (k, ±1)` with `e_i × e_j = ±e_k`, zero-based.
fn cross_table() -> [[Option<(usize, f64)>; 7]; 7] {
    let mut t = [[None; 7]; 7];
    for line in FANO {
        let [a, b, c] = line.map(|i| i - 1);
        for (i, j, k) in [(a, b, c), (b, c, a), (c, a, b)] {
            t[i][j] = Some((k, 1.0));
            t[j][i] = Some((k, -1.0));
        }
    }
    t
}

/// `J_p v = p × v` on `ℝ⁷ = Im 𝕆`.
pub fn octonion_complex() -> ComplexStructureFn {
    let table = cross_table();
    Arc::new(move |p, v| {
        let mut out = vec![p[0].zero_like(); 7];
        for i in 0..7 {
            for j in 0..7 {
                if let Some((k, s)) = table[i][j] {
                    out[k] += &p[i] * &v[j] * s;
                }
            }
        }
        out
    })
}

fn chart_box(half: f64, dim: usize, last: (f64, f64)) -> BoxDomain {
    let mut lo = vec![-half; dim];
    let mut hi = vec![half; dim];
    lo.push(last.0);
    hi.push(last.1);
    BoxDomain::new(lo, hi)
}

/// Unit `S^{2n+1} ⊂ ℂ^{n+1}` as the slice `r = 1` of `(u, r) ↦ r S(u)`.
pub fn sasakian_sphere(n: usize) -> Result<HypersurfaceModel> {
    let k = 2 * n + 1;
    let ambient = AlmostHermitian::embedded(
        k + 1,
        chart_box(0.5, k, (0.8, 1.2)),
        move |x| {
            let r = &x[k];
            inverse_stereographic(&x[..k]).iter().map(|s| s * r).collect()
        },
        standard_complex(),
    )?;
    HypersurfaceModel::slice(ambient, 1.0, 1.0, BoxDomain::cube(k, 0.5))
}

/// Ellipsoid `x₁²/a² + x₂² + x₃² + x₄² = 1` as the slice `s = 0` of
/// `(u, s) ↦ (1 + s) diag(a, 1, 1, 1) S(u)`.
pub fn ellipsoid_c2(a: f64) -> Result<HypersurfaceModel> {
    let ambient = AlmostHermitian::embedded(
        4,
        chart_box(0.5, 3, (-0.2, 0.2)),
        move |x| {
            let scale = &x[3] + 1.0;
            inverse_stereographic(&x[..3])
                .iter()
                .enumerate()
                .map(|(i, s)| s * &scale * if i == 0 { a } else { 1.0 })
                .collect()
        },
        standard_complex(),
    )?;
    HypersurfaceModel::slice(ambient, 0.0, 1.0, BoxDomain::cube(3, 0.5))
}

/// The slice `θ = level` of the nearly Kähler `S⁶` in the chart
/// `(u, θ) ↦ (cos θ S(u), sin θ)`, normal towards increasing `θ` when
/// `normal_sign > 0`.
pub fn six_sphere_slice(level: f64, normal_sign: f64) -> Result<HypersurfaceModel> {
    let ambient = AlmostHermitian::embedded(
        6,
        chart_box(0.5, 5, (level - 0.3, level + 0.3)),
        |x| {
            let (c, s) = (x[5].cos(), x[5].sin());
            let mut p: Vec<Jet> = inverse_stereographic(&x[..5]).iter().map(|v| v * &c).collect();
            p.push(s);
            p
        },
        octonion_complex(),
    )?;
    HypersurfaceModel::slice(ambient, level, normal_sign, BoxDomain::cube(5, 0.5))
}

/// `φ∂_{x_k} = ∂_{y_k}`, `φ∂_{y_k} = −∂_{x_k}`, `φ∂_t = 0` on `(x, y, t)`.
fn standard_phi(n: usize, like: &Jet) -> Vec<Jet> {
    let m = 2 * n + 1;
    let mut phi = vec![like.lift_const(0.0); m * m];
    for k in 0..n {
        phi[(n + k) * m + k] = like.lift_const(1.0);
        phi[k * m + n + k] = like.lift_const(-1.0);
    }
    phi
}

fn last_unit(m: usize, like: &Jet) -> Vec<Jet> {
    (0..m)
        .map(|i| like.lift_const(if i + 1 == m { 1.0 } else { 0.0 }))
        .collect()
}

/// `g = dt² + e^{2ct}(Σ dx_k² + dy_k²)` with `ξ = ∂_t`.
pub fn kenmotsu_warped(n: usize, c: f64) -> Result<AlmostContactStructure> {
    let m = 2 * n + 1;
    let mut lo = vec![-1.0; m];
    let mut hi = vec![1.0; m];
    lo[m - 1] = -0.5;
    hi[m - 1] = 0.5;
    let model = ManifoldModel::intrinsic(m, BoxDomain::new(lo, hi), move |x| {
        let w = x[m - 1].scale(2.0 * c).exp();
        let mut g = vec![x[0].zero_like(); m * m];
        for i in 0..m - 1 {
            g[i * m + i] = w.clone();
        }
        g[m * m - 1] = x[0].lift_const(1.0);
        g
    });
    AlmostContactStructure::from_model(model, move |x| {
        let mut v = standard_phi(n, &x[0]);
        v.extend(last_unit(m, &x[0]));
        v
    })
}

/// Flat `ℝ^{2n+1}` with constant `φ` and `ξ = ∂_t`.
pub fn cosymplectic_flat(n: usize) -> Result<AlmostContactStructure> {
    let m = 2 * n + 1;
    AlmostContactStructure::from_model(ManifoldModel::flat(m, BoxDomain::cube(m, 1.0)), move |x| {
        let mut v = standard_phi(n, &x[0]);
        v.extend(last_unit(m, &x[0]));
        v
    })
}

/// Heisenberg group: `η = dz − y dx`, `g = dx² + dy² + η²`, `ξ = ∂_z`,
/// `φ∂_x = ∂_y`, `φ∂_y = −∂_x − y∂_z`.
pub fn nil3() -> Result<AlmostContactStructure> {
    let model = ManifoldModel::intrinsic(3, BoxDomain::cube(3, 1.0), |x| {
        let y = &x[1];
        let zero = y.zero_like();
        let one = y.lift_const(1.0);
        vec![
            y * y + 1.0,
            zero.clone(),
            -y,
            zero.clone(),
            one.clone(),
            zero.clone(),
            -y,
            zero,
            one,
        ]
    });
    AlmostContactStructure::from_model(model, |x| {
        let y = &x[1];
        let zero = y.zero_like();
        let one = y.lift_const(1.0);
        vec![
            zero.clone(),
            -&one,
            zero.clone(),
            one.clone(),
            zero.clone(),
            zero.clone(),
            zero.clone(),
            -y,
            zero.clone(),
            zero.clone(),
            zero,
            one,
        ]
    })
}
