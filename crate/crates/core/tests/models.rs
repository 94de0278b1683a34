use nalgebra::DMatrix;
use proptest::prelude::*;

use harmonic_acs::acs::{classify, unit, CLASSIFY_TOL, STRUCTURE_TOL};
use harmonic_acs::catalog::{self, Model, Params, IDS};
use harmonic_acs::geom::{r_operator, Backend, FrameChoice};
use harmonic_acs::harmonic::{harmonicity, HarmonicPoint, HarmonicQuantities, FD_TOL, JET_TOL};
use harmonic_acs::hyper::hypersurface_report;
use harmonic_acs::parallel::Execution;

fn build(id: &str) -> Model {
    catalog::build(id, &Params::default()).unwrap()
}

fn sample(m: &Model, count: usize) -> Vec<Vec<f64>> {
    m.structure().domain().sample(count, 17)
}

#[test]
fn every_model_is_a_valid_structure() {
    for id in IDS {
        let m = build(id);
        let pts = sample(&m, 6);
        let v = m.structure().validate(&pts, Execution::Sequential).unwrap();
        assert!(v.passed(STRUCTURE_TOL), "{id}: {v:?}");
    }
}

#[test]
fn verdicts_match_catalog_expectations() {
    for id in IDS {
        let m = build(id);
        let r = harmonicity(
            m.structure(),
            &sample(&m, 6),
            JET_TOL,
            Backend::Jet,
            Execution::Parallel,
        )
        .unwrap();
        let want = catalog::expected_verdicts(id, &Params::default())
            .unwrap()
            .resolve(&r.verdicts);
        assert_eq!((r.verdicts.harmonic_section, r.verdicts.harmonic_map), want, "{id}");
    }
}

#[test]
fn fixed_expectations_for_resolved_models() {
    let ell = build("ellipsoid-c2");
    let r = harmonicity(
        ell.structure(),
        &sample(&ell, 4),
        JET_TOL,
        Backend::Jet,
        Execution::Parallel,
    )
    .unwrap();
    assert!(!r.verdicts.xi_harmonic && r.verdicts.j_harmonic);
    let nil = build("nil3");
    let r = harmonicity(
        nil.structure(),
        &sample(&nil, 4),
        JET_TOL,
        Backend::Jet,
        Execution::Parallel,
    )
    .unwrap();
    assert!(r.verdicts.harmonic_section && r.verdicts.harmonic_map);
}

#[test]
fn classification_flags_match_catalog() {
    for id in IDS {
        let m = build(id);
        let c = classify(
            m.structure(),
            &sample(&m, 4),
            CLASSIFY_TOL,
            Backend::Jet,
            Execution::Parallel,
        )
        .unwrap();
        let flags = serde_json::to_value(c.flags).unwrap();
        for f in catalog::expected_flags(id, &Params::default()).unwrap() {
            assert_eq!(flags[*f], serde_json::Value::Bool(true), "{id}: {f}");
        }
    }
}

#[test]
fn round_sphere_fit_and_kenmotsu_fit() {
    for (id, params, alpha, beta) in [
        (
            "sasakian-sphere",
            Params {
                n: Some(2),
                ..Params::default()
            },
            1.0,
            0.0,
        ),
        (
            "kenmotsu-warped",
            Params {
                c: Some(0.4),
                ..Params::default()
            },
            0.0,
            0.4,
        ),
        ("nil3", Params::default(), -0.5, 0.0),
        ("cosymplectic-flat", Params::default(), 0.0, 0.0),
    ] {
        let m = catalog::build(id, &params).unwrap();
        let c = classify(
            m.structure(),
            &sample(&m, 4),
            CLASSIFY_TOL,
            Backend::Jet,
            Execution::Parallel,
        )
        .unwrap();
        assert!(c.alpha.deviation_from(alpha) < 1e-9, "{id} alpha {:?}", c.alpha);
        assert!(c.beta.deviation_from(beta) < 1e-9, "{id} beta {:?}", c.beta);
    }
}

#[test]
fn parallel_and_sequential_reports_agree() {
    let m = build("nearly-sasakian-s5");
    let pts = sample(&m, 6);
    let a = harmonicity(m.structure(), &pts, JET_TOL, Backend::Jet, Execution::Parallel).unwrap();
    let b = harmonicity(m.structure(), &pts, JET_TOL, Backend::Jet, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fd_backend_reproduces_verdicts() {
    for id in IDS {
        let m = build(id);
        let pts = sample(&m, 3);
        let j = harmonicity(m.structure(), &pts, JET_TOL, Backend::Jet, Execution::Parallel).unwrap();
        let f = harmonicity(m.structure(), &pts, FD_TOL, Backend::Fd, Execution::Parallel).unwrap();
        assert_eq!(j.verdicts, f.verdicts, "{id}");
        let d = (j.maxima.form_norm - f.maxima.form_norm).abs();
        assert!(d < 1e-3, "{id}: form norm jet vs fd {d}");
    }
}

/// `∇̄²_{X,Y}J − ∇̄²_{Y,X}J = [R̄(X,Y), J]` on `𝒟`, with `R̄ = P R P + r(∇_Xξ, ∇_Yξ)`.
#[test]
fn second_derivative_of_j_satisfies_ricci_identity() {
    for id in [
        "sasakian-sphere",
        "kenmotsu-warped",
        "nil3",
        "ellipsoid-c2",
        "nearly-sasakian-s5",
    ] {
        let m = build(id);
        for x in sample(&m, 2) {
            let p = m.structure().at(&x, Backend::Jet).unwrap();
            let dim = p.dim();
            let proj = p.projector();
            let j = p.j();
            let dxi = p.dxi();
            let g = DMatrix::identity(dim, dim);
            let mut worst: f64 = 0.0;
            for a in 0..dim {
                for b in 0..dim {
                    let lhs = &proj * (p.hess_bar_j_at(a, b) - p.hess_bar_j_at(b, a)) * &proj;
                    let (u, v) = (dxi.column(a).into_owned(), dxi.column(b).into_owned());
                    let r_bar = &proj * p.curvature(a, b) * &proj
                        + DMatrix::from_fn(dim, dim, |r, c| r_operator(&u, &v, &unit(dim, c), &g)[r]);
                    let r_bar = &proj * r_bar * &proj;
                    let rhs = &r_bar * &j - &j * &r_bar;
                    worst = worst.max((lhs - rhs).amax());
                }
            }
            assert!(worst < 1e-9, "{id}: {worst}");
        }
    }
}

#[test]
fn hypersurface_theorems_hold_on_catalog() {
    for id in [
        "sasakian-sphere",
        "ellipsoid-c2",
        "nearly-cosymplectic-s5",
        "nearly-sasakian-s5",
        "product-line",
    ] {
        let m = build(id);
        let r = hypersurface_report(
            m.hypersurface().unwrap(),
            &sample(&m, 4),
            JET_TOL,
            Backend::Jet,
            Execution::Parallel,
        )
        .unwrap();
        assert!(r.identities.max() < 1e-8, "{id}: {:?}", r.identities);
        let t = r.theorems;
        for held in [t.shape_theorem_holds, t.umbilic_theorem_holds, t.product_theorem_holds]
            .into_iter()
            .flatten()
        {
            assert!(held, "{id}: {t:?}");
        }
        if let Some(b) = t.biconditionals {
            assert!(b.iter().all(|x| *x), "{id}: {b:?}");
        }
    }
}

#[test]
fn six_sphere_slices_are_umbilic() {
    let nc = build("nearly-cosymplectic-s5");
    let r = hypersurface_report(
        nc.hypersurface().unwrap(),
        &sample(&nc, 3),
        JET_TOL,
        Backend::Jet,
        Execution::Parallel,
    )
    .unwrap();
    assert!(r.theorems.totally_geodesic && r.theorems.strict_ambient);
    assert_eq!(r.theorems.umbilic_prediction, Some(true));

    let ns = build("nearly-sasakian-s5");
    let r = hypersurface_report(
        ns.hypersurface().unwrap(),
        &sample(&ns, 3),
        JET_TOL,
        Backend::Jet,
        Execution::Parallel,
    )
    .unwrap();
    assert!(r.theorems.totally_umbilic && !r.theorems.totally_geodesic);
    assert_eq!(r.theorems.umbilic_prediction, Some(false));
    assert!((r.ambient.h + 1.0).abs() < 1e-9);
    for p in &r.per_point {
        assert!(p.umbilic_tau_formula < 1e-9 && p.umbilic_xi_formula < 1e-9);
    }
}

#[test]
fn invalid_catalog_requests_are_rejected() {
    use harmonic_acs::Error;
    assert!(matches!(
        catalog::build("torus", &Params::default()),
        Err(Error::UnknownModel(_))
    ));
    let bad = Params {
        n: Some(0),
        ..Params::default()
    };
    assert!(matches!(
        catalog::build("sasakian-sphere", &bad),
        Err(Error::InvalidParameter(_))
    ));
    let bad = Params {
        base: Some("product-line".into()),
        ..Params::default()
    };
    assert!(catalog::build("product-line", &bad).is_err());
}

fn frame_free(p: &HarmonicPoint) -> [f64; 8] {
    [
        p.xi_residual_norm,
        p.tau_bar_norm,
        p.t_phi_norm,
        p.section_residual_norm,
        p.form1_norm,
        p.form2_norm,
        p.twistor_form_norm,
        p.grad_xi_sq,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn harmonic_norms_do_not_depend_on_frame(idx in 0usize..IDS.len(), seed in 0u64..10_000) {
        let m = build(IDS[idx]);
        let x = m.structure().domain().sample(1, seed).remove(0);
        let a = m.structure().at(&x, Backend::Jet).unwrap();
        let b = m.structure().at_in_frame(&x, Backend::Jet, FrameChoice::Random(seed)).unwrap();
        let qa = HarmonicPoint::from_quantities(&x, &HarmonicQuantities::compute(&a));
        let qb = HarmonicPoint::from_quantities(&x, &HarmonicQuantities::compute(&b));
        for (u, v) in frame_free(&qa).iter().zip(frame_free(&qb)) {
            prop_assert!((u - v).abs() < 1e-9 * (1.0 + u.abs()), "{} {u} vs {v}", IDS[idx]);
        }
    }

    #[test]
    fn kenmotsu_form_scales_cubically(c in 0.2f64..1.5, n in 1usize..=2) {
        let params = Params { n: Some(n), c: Some(c), ..Params::default() };
        let m = catalog::build("kenmotsu-warped", &params).unwrap();
        let r = harmonicity(m.structure(), &sample(&m, 2), JET_TOL, Backend::Jet, Execution::Sequential).unwrap();
        let want = 2.0 * n as f64 * c.powi(3);
        for p in &r.per_point {
            prop_assert!((p.form_norm - want).abs() < 1e-9 * (1.0 + want));
        }
        prop_assert!(r.verdicts.harmonic_section && !r.verdicts.harmonic_map);
    }

    #[test]
    fn ellipsoid_section_follows_xi(a in 0.6f64..2.0) {
        let params = Params { a: Some(a), ..Params::default() };
        let m = catalog::build("ellipsoid-c2", &params).unwrap();
        let r = harmonicity(m.structure(), &sample(&m, 2), JET_TOL, Backend::Jet, Execution::Sequential).unwrap();
        prop_assert_eq!(r.verdicts.harmonic_section, r.verdicts.xi_harmonic);
        prop_assert!(r.maxima.tau_bar_norm < 1e-9 && r.maxima.t_phi_norm < 1e-9);
        if (a - 1.0).abs() > 0.05 {
            prop_assert!(!r.verdicts.xi_harmonic);
        }
    }
}
