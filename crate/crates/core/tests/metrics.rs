use qpolar::channel::KrausChannel;
use qpolar::genlib::{amplitude_damping, dephasing, depolarizing, rotation2};
use qpolar::matcore::*;
use qpolar::metrics::*;

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

#[test]
fn m_fidelity_examples() {
    let id = identity(2);
    let m = ket_bra(2, 0, 0);
    close(m_fidelity(&KrausChannel::identity(2), &id, &m).unwrap().re, 1.0, 1e-14);
    close(m_fidelity(&depolarizing(2, 0.9).unwrap(), &id, &m).unwrap().re, 0.95, 1e-12);
    let f = m_fidelity(&dephasing(2, 0.5).unwrap(), &id, &pauli_x()).unwrap();
    close(f.re, 0.0, 1e-14);
    close(f.im, 0.0, 1e-14);
    assert!(matches!(m_fidelity(&KrausChannel::identity(2), &id, &zeros(2)), Err(qpolar::Error::ZeroOperator)));
}

#[test]
fn phi_examples() {
    let id = identity(2);
    close(phi(&KrausChannel::identity(2), &id).unwrap(), 1.0, 1e-15);
    let r = KrausChannel::unitary(rotation2(std::f64::consts::PI / 6.0));
    close(phi(&r, &id).unwrap(), 0.75, 1e-12);
    close(phi(&depolarizing(2, 0.9).unwrap(), &id).unwrap(), 0.925, 1e-12);
    assert!(matches!(phi(&r, &from_real_rows(2, &[1.0, 1.0, 0.0, 1.0])), Err(qpolar::Error::TargetNotUnitary(_))));
}

#[test]
fn phi_routes_agree() {
    for ch in [amplitude_damping(3, 0.2).unwrap(), depolarizing(3, 0.7).unwrap()] {
        let u = rotation_like(3);
        close(phi(&ch, &u).unwrap(), phi_basis_average(&ch, &u).unwrap(), 1e-12);
    }
}

fn rotation_like(d: usize) -> ComplexMatrix {
    qpolar::genlib::random_unitary(d, 5)
}

#[test]
fn fidelity_examples() {
    close(avg_fidelity(1.0, 2), 1.0, 1e-15);
    close(avg_fidelity(0.925, 2), 0.95, 1e-15);
    close(avg_fidelity(0.0, 2), 1.0 / 3.0, 1e-15);
    close(infidelity(0.925, 2), 0.05, 1e-15);
}

#[test]
fn upsilon_examples() {
    let u = KrausChannel::unitary(rotation2(0.3));
    close(upsilon(&u), 1.0, 1e-12);
    close(unitarity(upsilon(&u), 2), 1.0, 1e-12);
    let dep = depolarizing(2, 0.9).unwrap();
    close(upsilon(&dep).powi(2), 0.8575, 1e-12);
    close(unitarity(upsilon(&dep), 2), 0.81, 1e-12);
    let ad = amplitude_damping(2, 0.19).unwrap();
    close(upsilon(&ad).powi(2), 0.82805, 1e-12);
    close(upsilon_from_weights(&[0.905, 0.095]).powi(2), 0.82805, 1e-12);
}

#[test]
fn lk_gap_examples() {
    let id = identity(2);
    let (l1, l2) = lk_gap_bounds(&KrausChannel::unitary(rotation2(0.2)), &id).unwrap();
    close(l1.observed, 0.0, 1e-12);
    close(l2.unwrap().observed, 0.0, 1e-12);
    let (l1, l2) = lk_gap_bounds(&depolarizing(2, 0.9).unwrap(), &id).unwrap();
    close(l1.observed, 0.001875, 1e-12);
    close(l1.upper, 0.02030625, 1e-12);
    assert!(l1.holds && l2.unwrap().holds);
}

#[test]
fn lemma2_absent_for_catastrophic() {
    let (_, l2) = lk_gap_bounds(&depolarizing(2, 0.0).unwrap(), &identity(2)).unwrap();
    assert!(l2.is_none());
}

#[test]
fn non_catastrophic_examples() {
    let id = identity(2);
    assert!(non_catastrophic(&KrausChannel::identity(2), &id).unwrap());
    let full = depolarizing(2, 0.0).unwrap();
    close(phi(&full, &id).unwrap(), 0.25, 1e-12);
    assert!(!non_catastrophic(&full, &id).unwrap());
    let r = KrausChannel::unitary(rotation2(std::f64::consts::FRAC_PI_2));
    close(upsilon(&r), 1.0, 1e-12);
    assert!(!non_catastrophic(&r, &id).unwrap());
}

#[test]
fn metrics_report() {
    let rep = MetricsReport::compute(&depolarizing(2, 0.9).unwrap(), &identity(2)).unwrap();
    close(rep.phi, 0.925, 1e-12);
    close(rep.avg_fidelity, 0.95, 1e-12);
    close(rep.unitarity, 0.81, 1e-12);
    close(rep.lk_phi, 0.925, 1e-12);
    close(rep.lk_upsilon, 0.925, 1e-12);
    assert!(rep.non_catastrophic);
}

#[test]
fn monte_carlo_trivial_cases() {
    let id = identity(2);
    let f = haar_fidelity_mc(&KrausChannel::identity(2), &id, 200, 1).unwrap();
    close(f.mean, 1.0, 1e-12);
    let u = haar_unitarity_mc(&KrausChannel::unitary(rotation2(0.4)), 200, 1).unwrap();
    close(u.mean, 1.0, 1e-12);
    assert!(haar_fidelity_mc(&KrausChannel::identity(2), &id, 10, 1).is_err());
}

// Zero-variance estimators (depolarizing) leave only rounding, hence the floor.
fn within_3se(est: McEstimate, expected: f64) {
    assert!((est.mean - expected).abs() <= 3.0 * est.std_err + 1e-12, "{est:?} vs {expected}");
}

#[test]
fn monte_carlo_matches_formulas() {
    let id = identity(2);
    let n = 100_000;
    within_3se(haar_fidelity_mc(&depolarizing(2, 0.9).unwrap(), &id, n, 7).unwrap(), 0.95);
    let r = KrausChannel::unitary(rotation2(0.3));
    within_3se(haar_fidelity_mc(&r, &id, n, 7).unwrap(), (2.0 * 0.3f64.cos().powi(2) + 1.0) / 3.0);
    within_3se(haar_unitarity_mc(&depolarizing(2, 0.9).unwrap(), n, 7).unwrap(), 0.81);
    within_3se(haar_unitarity_mc(&amplitude_damping(2, 0.19).unwrap(), n, 7).unwrap(), (4.0 * 0.82805 - 1.0) / 3.0);
}

#[test]
fn monte_carlo_is_reproducible() {
    let ch = amplitude_damping(2, 0.3).unwrap();
    let a = haar_fidelity_mc(&ch, &identity(2), 500, 99).unwrap();
    let b = haar_fidelity_mc(&ch, &identity(2), 500, 99).unwrap();
    assert_eq!(a, b);
}
