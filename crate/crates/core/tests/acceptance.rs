//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use nalgebra::DMatrix;

use harmonic_acs::acs::{classify, trans_sasakian_identities, CLASSIFY_TOL};
use harmonic_acs::catalog::{self, inverse_stereographic, Model, Params};
use harmonic_acs::geom::{Backend, BoxDomain, ManifoldModel, DEFAULT_POINTS, DEFAULT_SEED};
use harmonic_acs::harmonic::{harmonicity, HarmonicQuantities, JET_TOL};
use harmonic_acs::hyper::hypersurface_report;
use harmonic_acs::liealg::{self, SkewMatrix};
use harmonic_acs::parallel::Execution;

const EXEC: Execution = Execution::Parallel;
const JET: Backend = Backend::Jet;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn model(id: &str, params: Params) -> Model {
    catalog::build(id, &params).unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn points(m: &Model) -> Vec<Vec<f64>> {
    m.structure().domain().sample(DEFAULT_POINTS, DEFAULT_SEED)
}

fn with_n(n: usize) -> Params {
    Params {
        n: Some(n),
        ..Params::default()
    }
}

fn with_base(base: &str) -> Params {
    Params {
        base: Some(base.to_string()),
        ..Params::default()
    }
}

/// Rank of the images of the standard basis of `skew(ℝ^{2k+1})` under `part`.
fn summand_dim(k: usize, part: impl Fn(&liealg::LieSplit) -> DMatrix<f64>) -> usize {
    let r = 2 * k + 1;
    let mut cols = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            let mut e = DMatrix::zeros(r, r);
            e[(i, j)] = 1.0;
            e[(j, i)] = -1.0;
            let s = liealg::decompose(&SkewMatrix::new(e).unwrap());
            cols.push(part(&s).iter().copied().collect::<Vec<f64>>());
        }
    }
    let m = DMatrix::from_fn(r * r, cols.len(), |a, b| cols[b][a]);
    m.singular_values().iter().filter(|s| **s > 1e-9).count()
}

fn lie_algebra() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut dims = Vec::new();
    for k in 1..=3 {
        let b = liealg::verify_bracket_relations(k, 50, 7);
        let m = liealg::verify_m2_identities(k, 50, 11);
        ok &= b.passed() && m.passed();
        worst = worst.max(b.max_violation).max(m.max_violation);

        let mut rng_err: f64 = 0.0;
        for seed in 0..20u64 {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = SkewMatrix::random(k, &mut rng);
            let s = liealg::decompose(&a);
            rng_err = rng_err.max((s.reconstruct() - a.entries()).amax());
            let h = liealg::hat(&s.m1_part).unwrap();
            rng_err = rng_err.max((h - s.m1_part.entries().view((0, 0), (2 * k, 2 * k))).amax());
        }
        worst = worst.max(rng_err);
        ok &= rng_err < 1e-12;

        let d = (
            summand_dim(k, |s| s.h_part.entries().clone()),
            summand_dim(k, |s| s.m1_part.entries().clone()),
            summand_dim(k, |s| s.m2_part.entries().clone()),
        );
        ok &= d == (k * k, k * k - k, 2 * k);
        dims.push(format!("k={k}: {d:?}"));
    }
    check(
        ok && worst < 1e-12,
        format!("max violation {worst:.2e}; dims {}", dims.join(", ")),
    )
}

fn engine() -> Outcome {
    let mut curv: f64 = 0.0;
    let mut sym: f64 = 0.0;
    let mut metric: f64 = 0.0;
    let mut fd: f64 = 0.0;
    for k in [3usize, 5] {
        let m = ManifoldModel::embedded(k, k + 1, BoxDomain::cube(k, 0.8), inverse_stereographic);
        for x in m.domain.sample(8, DEFAULT_SEED) {
            let conn = m.connection(&x, JET).unwrap();
            let c = m.curvature(&x, JET).unwrap();
            let g = &c.metric;
            for l in 0..k {
                for kk in 0..k {
                    for i in 0..k {
                        for j in 0..k {
                            let want =
                                g[(j, kk)] * f64::from(u8::from(l == i)) - g[(i, kk)] * f64::from(u8::from(l == j));
                            curv = curv.max((c.riemann.get(&[l, kk, i, j]) - want).abs());
                        }
                    }
                }
            }
            sym = sym.max(c.symmetry_defect());
            metric = metric.max(conn.nabla(&conn.metric_tensor()).values().max_abs());
            let cf = m.curvature(&x, Backend::Fd).unwrap();
            let diff = c
                .riemann
                .data()
                .iter()
                .zip(cf.riemann.data())
                .map(|(a, b)| (a - b).abs());
            fd = fd.max(diff.fold(0.0, f64::max));
        }
    }
    check(
        curv < 1e-8 && sym < 1e-8 && metric < 1e-9 && fd < 5e-5,
        format!("curvature {curv:.2e}, symmetries {sym:.2e}, nabla g {metric:.2e}, jet-vs-fd {fd:.2e}"),
    )
}

fn sasakian_five_sphere() -> Outcome {
    let m = model("sasakian-sphere", with_n(2));
    let pts = points(&m);
    let r = harmonicity(m.structure(), &pts, JET_TOL, JET, EXEC).unwrap();
    let x = &r.maxima;
    let mut lap: f64 = 0.0;
    for p in &pts {
        let sp = m.structure().at(p, JET).unwrap();
        let q = HarmonicQuantities::compute(&sp);
        lap = lap.max((&q.rough_laplacian_xi - sp.xi() * 4.0).amax());
    }
    let worst = [x.tau_bar_norm, x.section_residual_norm, x.form1_norm, x.form2_norm, lap];
    check(
        worst.iter().all(|v| *v < 1e-6),
        format!(
            "tau {:.2e}, section {:.2e}, form1 {:.2e}, form2 {:.2e}, laplacian-4xi {lap:.2e}",
            x.tau_bar_norm, x.section_residual_norm, x.form1_norm, x.form2_norm
        ),
    )
}

fn kenmotsu_not_map() -> Outcome {
    let m = model("kenmotsu-warped", with_n(1));
    let r = harmonicity(m.structure(), &points(&m), JET_TOL, JET, EXEC).unwrap();
    let form_dev = r
        .per_point
        .iter()
        .map(|p| (p.form_norm - 2.0).abs())
        .fold(0.0, f64::max);
    let x = &r.maxima;
    check(
        x.tau_bar_norm < 1e-6 && x.section_residual_norm < 1e-6 && form_dev < 1e-5,
        format!(
            "tau {:.2e}, section {:.2e}, max |form| - 2 = {form_dev:.2e}",
            x.tau_bar_norm, x.section_residual_norm
        ),
    )
}

fn trans_sasakian() -> Outcome {
    let cases = [
        ("sasakian-sphere", with_n(1)),
        ("sasakian-sphere", with_n(2)),
        ("kenmotsu-warped", with_n(1)),
        ("kenmotsu-warped", with_n(2)),
        ("cosymplectic-flat", with_n(1)),
        ("cosymplectic-flat", with_n(2)),
        ("nil3", Params::default()),
        ("ellipsoid-c2", Params::default()),
        ("nearly-cosymplectic-s5", Params::default()),
        ("nearly-sasakian-s5", Params::default()),
    ];
    let mut ok = true;
    let mut checked = Vec::new();
    let (mut da, mut ga, mut ab): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (id, params) in cases {
        let m = model(id, params);
        let s = m.structure();
        let pts = points(&m);
        let c = classify(s, &pts, CLASSIFY_TOL, JET, EXEC).unwrap();
        if !c.flags.trans_sasakian {
            continue;
        }
        let r = trans_sasakian_identities(s, &pts, JET, EXEC).unwrap();
        ok &= r.d_alpha_xi < 1e-6;
        da = da.max(r.d_alpha_xi);
        if s.dim() >= 5 {
            ok &= r.grad_alpha < 1e-6 && r.alpha_beta < 1e-8;
            ga = ga.max(r.grad_alpha);
            ab = ab.max(r.alpha_beta);
        }
        checked.push(format!("{id}/{}", s.dim()));
    }
    ok &= checked.len() >= 7;
    check(
        ok,
        format!(
            "dalpha(xi)+2ab {da:.2e}, |grad alpha| {ga:.2e}, |ab| {ab:.2e} on {}",
            checked.join(" ")
        ),
    )
}

fn nearly_cosymplectic_map() -> Outcome {
    let m = model("nearly-cosymplectic-s5", Params::default());
    let r = harmonicity(m.structure(), &points(&m), JET_TOL, JET, EXEC).unwrap();
    let x = &r.maxima;
    let v = [
        x.tau_bar_norm,
        x.t_phi_norm,
        x.section_residual_norm,
        x.form1_norm,
        x.form2_norm,
    ];
    check(
        v.iter().all(|e| *e < 1e-6),
        format!(
            "tau {:.2e}, T {:.2e}, section {:.2e}, form1 {:.2e}, form2 {:.2e}",
            v[0], v[1], v[2], v[3], v[4]
        ),
    )
}

fn nearly_sasakian_not_harmonic() -> Outcome {
    let id = "nearly-sasakian-s5";
    let m = model(id, Params::default());
    let hs = m.hypersurface().unwrap();
    let r = hypersurface_report(hs, &points(&m), JET_TOL, JET, EXEC).unwrap();
    let min_tau = r
        .per_point
        .iter()
        .map(|p| p.harmonic.tau_bar_norm)
        .fold(f64::INFINITY, f64::min);
    let killing = r
        .per_point
        .iter()
        .map(|p| p.characterizations.map_or(f64::INFINITY, |c| c.killing_defect))
        .fold(0.0, f64::max);
    let v = r.harmonic.verdicts;
    let expected = catalog::expected_verdicts(id, &Params::default()).unwrap().resolve(&v);
    let verdicts = (v.harmonic_section, v.harmonic_map);
    check(
        min_tau > 0.1 && killing < 1e-6 && verdicts == (false, false) && verdicts == expected,
        format!("min |tau| {min_tau:.4}, killing {killing:.2e}, verdicts {verdicts:?} expected {expected:?}"),
    )
}

fn hypersurface_identities() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (id, params) in [
        ("nearly-cosymplectic-s5", Params::default()),
        ("nearly-sasakian-s5", Params::default()),
        ("product-line", Params::default()),
    ] {
        let m = model(id, params);
        let r = hypersurface_report(m.hypersurface().unwrap(), &points(&m), JET_TOL, JET, EXEC).unwrap();
        let id_max = r.identities.max();
        ok &= id_max < 1e-5;
        if id != "product-line" {
            ok &= r.identities.nearly_kahler.is_some();
        }
        parts.push(format!("{id} {id_max:.2e}"));
    }
    check(ok, parts.join(", "))
}

fn product_twistor() -> Outcome {
    let m = model("product-line", with_base("kenmotsu-warped"));
    let r = hypersurface_report(m.hypersurface().unwrap(), &points(&m), JET_TOL, JET, EXEC).unwrap();
    let ident = r.identities.product_twistor_identity.unwrap_or(f64::INFINITY);

    let m = model("product-line", with_base("sasakian-sphere"));
    let r = hypersurface_report(m.hypersurface().unwrap(), &points(&m), JET_TOL, JET, EXEC).unwrap();
    let (tau, tw) = (r.ambient.ambient_tau_norm, r.ambient.ambient_twistor_norm);
    check(
        ident < 1e-6 && tau < 1e-6 && tw < 1e-6,
        format!("kenmotsu x R identity {ident:.2e}; sphere x R tau {tau:.2e}, form {tw:.2e}"),
    )
}

fn kahler_bundle() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for id in ["nil3", "ellipsoid-c2"] {
        let m = model(id, Params::default());
        let (mut defect, mut diff, mut tau, mut t): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for p in points(&m) {
            let q = HarmonicQuantities::compute(&m.structure().at(&p, JET).unwrap());
            defect = defect.max(q.kahler_bundle_defect);
            diff = diff.max((&q.section_residual - &q.xi_residual).amax());
            tau = tau.max(q.tau_bar.amax());
            t = t.max(q.t_phi.amax());
        }
        ok &= defect < 1e-7 && diff < 1e-7 && tau < 1e-7 && t < 1e-7;
        parts.push(format!(
            "{id}: defect {defect:.2e}, section-xi {diff:.2e}, tau {tau:.2e}, T {t:.2e}"
        ));
    }
    check(ok, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 lie algebra splitting", lie_algebra),
        ("2 geometry engine", engine),
        ("3 sasakian S^5 harmonic map", sasakian_five_sphere),
        ("4 kenmotsu section, not map", kenmotsu_not_map),
        ("5 trans-sasakian constraints", trans_sasakian),
        ("6 nearly cosymplectic S^5 harmonic map", nearly_cosymplectic_map),
        ("7 nearly sasakian S^5 not harmonic", nearly_sasakian_not_harmonic),
        ("8 hypersurface identities", hypersurface_identities),
        ("9 product twistor forms", product_twistor),
        ("10 kahler bundle reductions", kahler_bundle),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS  {name:<40} {secs:>7.2}s  {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name:<40} {secs:>7.2}s  {d}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
