use qpolar::channel::{canonical, validate_cptp, KrausChannel};
use qpolar::genlib::*;
use qpolar::matcore::*;
use qpolar::metrics::{avg_fidelity, infidelity, is_non_catastrophic, non_catastrophic, phi, unitarity, upsilon};
use qpolar::polar::{equability_constants, is_decoherent, DEFAULT_KAPPA};

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

fn all_specs() -> Vec<FamilySpec> {
    vec![
        FamilySpec::new(Family::Identity, 3),
        FamilySpec::new(Family::Depolarizing, 2).with("p", 0.9),
        FamilySpec::new(Family::Dephasing, 3).with("q", 0.2),
        FamilySpec::new(Family::StochasticWeyl, 2).with("p", 0.9),
        FamilySpec::new(Family::StochasticWeyl, 3).with("w_1_0", 0.05).with("w_0_2", 0.01),
        FamilySpec::new(Family::AmplitudeDamping, 3).with("gamma", 0.3),
        FamilySpec::new(Family::Rotation, 4).with("theta", 0.2),
        FamilySpec::new(Family::Rotation, 3).with("theta", -0.7),
        FamilySpec::new(Family::RandomUnitaryError, 3).with("epsilon", 0.1).seeded(1),
        FamilySpec::new(Family::RandomCptp, 2).with("kraus_rank", 4.0).seeded(2),
        FamilySpec::new(Family::RandomCptp, 3).with("kraus_rank", 3.0).with("epsilon", 0.05).seeded(3),
        FamilySpec::new(Family::PsdLkDecoherent, 3).with("strength", 0.1).seeded(4),
        FamilySpec::new(Family::ExtremalDephaser, 4),
        FamilySpec::new(Family::ExtremalDephaser, 8).with("randomized", 1.0).seeded(5),
        FamilySpec::new(Family::ExtremalUnitary, 4),
        FamilySpec::new(Family::Spiral, 3).with("alpha", 0.3),
        FamilySpec::new(Family::CoherenceMix, 2).with("r", 1e-3).with("level", 0.5),
        FamilySpec::new(Family::CoherenceMix, 3).with("r", 1e-3).with("level", 0.5),
    ]
}

#[test]
fn every_family_is_cptp() {
    for spec in all_specs() {
        let ch = make_channel(&spec).unwrap();
        let r = validate_cptp(&ch);
        assert!(r.ok, "{spec:?}: {r:?}");
        assert!(r.tp_slack < 1e-10, "{spec:?}: {r:?}");
    }
}

#[test]
fn random_families_are_reproducible() {
    for spec in all_specs().into_iter().filter(|s| s.seed.is_some()) {
        let a = make_channel(&spec).unwrap();
        let b = make_channel(&spec).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn parameter_ranges() {
    let bad = [
        FamilySpec::new(Family::Depolarizing, 2).with("p", 1.1),
        FamilySpec::new(Family::Dephasing, 2).with("q", 0.6),
        FamilySpec::new(Family::AmplitudeDamping, 2).with("gamma", -0.1),
        FamilySpec::new(Family::Rotation, 2).with("theta", 4.0),
        FamilySpec::new(Family::RandomCptp, 2).with("kraus_rank", 5.0).seeded(1),
        FamilySpec::new(Family::RandomCptp, 2).with("kraus_rank", 2.0),
        FamilySpec::new(Family::PsdLkDecoherent, 2).with("strength", 0.5).seeded(1),
        FamilySpec::new(Family::Spiral, 2).with("alpha", 0.3),
        FamilySpec::new(Family::Depolarizing, 2),
    ];
    for spec in bad {
        assert!(matches!(make_channel(&spec), Err(qpolar::Error::ParamOutOfRange(_))), "{spec:?}");
    }
}

#[test]
fn family_spec_json() {
    let json = r#"{"family":"amplitude_damping","dim":2,"params":{"gamma":0.19}}"#;
    let spec: FamilySpec = serde_json::from_str(json).unwrap();
    assert_eq!(spec, FamilySpec::new(Family::AmplitudeDamping, 2).with("gamma", 0.19));
    let spec = FamilySpec::new(Family::RandomCptp, 3).with("kraus_rank", 2.0).seeded(9);
    let back: FamilySpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(spec, back);
}

#[test]
fn depolarizing_weights() {
    let can = canonical(&depolarizing(2, 0.9).unwrap()).unwrap();
    for (w, want) in can.weights.iter().zip([0.925, 0.025, 0.025, 0.025]) {
        close(*w, want, 1e-12);
    }
}

#[test]
fn extremal_dephaser_d4() {
    let ch = extremal_dephaser(4, 1).unwrap();
    mat_eq(&ch.kraus[0], &diag_real(&[0.0, 1.0, 1.0, 1.0]));
    mat_eq(&ch.kraus[1], &ket_bra(4, 0, 0));
    close(phi(&ch, &identity(4)).unwrap(), 0.625, 1e-12);
}

fn mat_eq(a: &ComplexMatrix, b: &ComplexMatrix) {
    assert!(fro(&(a - b)) < 1e-14);
}

#[test]
fn spiral_is_trace_preserving() {
    let r = validate_cptp(&spiral(0.3).unwrap());
    assert!(r.tp_slack < 1e-14, "{r:?}");
}

#[test]
fn extremal_dephaser_analytic_large() {
    let d = 1024;
    let a = extremal_dephaser_analytic(d);
    let df = d as f64;
    close(a.infidelity, 2.0 * (df - 1.0) / (df * (df + 1.0)), 1e-15);
    assert!(a.infidelity > 2f64.powi(-11) && a.infidelity < 2f64.powi(-9));
    assert!(is_non_catastrophic(a.phi, a.upsilon));
    let e = equability_constants(&a.sigma, &vec![1.0; d], DEFAULT_KAPPA);
    assert!(!e.sse_ok && !e.wse_ok);
}

#[test]
fn analytic_matches_matrices_at_small_d() {
    for d in [4, 6, 8] {
        let a = extremal_dephaser_analytic(d);
        let ch = extremal_dephaser(d, 1).unwrap();
        close(a.phi, phi(&ch, &identity(d)).unwrap(), 1e-12);
        close(a.upsilon, upsilon(&ch), 1e-12);
        let can = canonical(&ch).unwrap();
        close(a.weights[0], can.weights[0], 1e-12);
    }
}

#[test]
fn random_unitary_examples() {
    let u = random_unitary(1, 3);
    close(u[(0, 0)].norm(), 1.0, 1e-12);
    assert_eq!(random_unitary(4, 8), random_unitary(4, 8));
    assert!(unitarity_defect(&random_unitary(6, 1)) < 1e-10);
}

#[test]
fn haar_trace_moment() {
    let n = 10_000;
    let xs: Vec<f64> = (0..n).map(|i| haar_unitary(&mut trial_rng(17, i), 2).trace().norm_sqr()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let se = (var / n as f64).sqrt();
    assert!((mean - 1.0).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn random_cptp_examples() {
    let u = random_cptp(3, 1, 4).unwrap();
    assert_eq!(u.len(), 1);
    assert!(unitarity_defect(&u.kraus[0]) < 1e-10);
    let ch = random_cptp(2, 4, 5).unwrap();
    let r = validate_cptp(&ch);
    assert!(r.ok && r.tp_slack <= 1e-12);
    let near = make_channel(&FamilySpec::new(Family::RandomCptp, 2).with("kraus_rank", 4.0).with("epsilon", 0.05).seeded(6))
        .unwrap();
    assert!(non_catastrophic(&near, &identity(2)).unwrap());
}

#[test]
fn psd_lk_examples() {
    let tiny = psd_lk_decoherent(2, 1e-4, 1).unwrap();
    assert!(phi(&tiny, &identity(2)).unwrap() > 1.0 - 1e-3);
    let ch = psd_lk_decoherent(2, 0.1, 2).unwrap();
    assert!(is_decoherent(&ch, 1e-9).unwrap());
    assert!(non_catastrophic(&ch, &identity(2)).unwrap());
    for d in [2, 3] {
        for seed in 0..100 {
            let ch = psd_lk_decoherent(d, 0.2, seed).unwrap();
            assert!(is_decoherent(&ch, 1e-9).unwrap(), "d={d} seed={seed}");
        }
    }
}

#[test]
fn closed_forms() {
    let id = identity(2);
    for p in [0.5, 0.8, 0.99] {
        close(unitarity(upsilon(&depolarizing(2, p).unwrap()), 2), p * p, 1e-12);
    }
    for q in [0.01, 0.2, 0.5] {
        close(phi(&dephasing(2, q).unwrap(), &id).unwrap(), 1.0 - q, 1e-12);
        close(phi(&dephasing(3, q).unwrap(), &identity(3)).unwrap(), 1.0 - q, 1e-12);
    }
    for g in [0.05f64, 0.19, 0.7] {
        let want = (1.0 + (1.0 - g).sqrt()).powi(2) / 4.0;
        close(phi(&amplitude_damping(2, g).unwrap(), &id).unwrap(), want, 1e-12);
    }
}

#[test]
fn coherence_mix_hits_target() {
    for d in [2, 3, 4] {
        for level in [0.0001, 0.01, 0.1, 0.5, 0.9] {
            let r = 1e-3;
            let ch = coherence_mix(d, r, level).unwrap();
            let u = identity(d);
            close(infidelity(phi(&ch, &u).unwrap(), d), r, 1e-9);
            let s = qpolar::polar::infidelity_split(&ch, &u).unwrap();
            let got = s.r_coh / s.r;
            assert!((got - level).abs() <= 0.05 * level, "d={d} level={level} got {got}");
        }
    }
}

#[test]
fn weyl_operators() {
    let x = weyl(3, 1, 0);
    let z = weyl(3, 0, 1);
    assert!(unitarity_defect(&x) < 1e-14 && unitarity_defect(&z) < 1e-14);
    // ZX = ω XZ.
    let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    assert!(fro(&(&z * &x - (&x * &z) * w)) < 1e-12);
    assert!(weyl(3, 1, 2).trace().norm() < 1e-12);
}

#[test]
fn fidelity_helper_consistency() {
    let ch: KrausChannel = depolarizing(3, 0.9).unwrap();
    let f = avg_fidelity(phi(&ch, &identity(3)).unwrap(), 3);
    close(f, 1.0 - infidelity(phi(&ch, &identity(3)).unwrap(), 3), 1e-15);
}
