use qpolar::channel::*;
use qpolar::genlib::{
    amplitude_damping, depolarizing, dephasing, extremal_dephaser, random_cptp, random_density, rotation2, trial_rng,
};
use qpolar::matcore::*;
use qpolar::metrics::phi;

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

fn mat_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
    let e = fro(&(a - b));
    assert!(e <= tol, "matrices differ by {e}");
}

fn bit_flip(delta: f64) -> KrausChannel {
    KrausChannel::new(vec![identity(2) * c((1.0 - delta).sqrt(), 0.0), pauli_x() * c(delta.sqrt(), 0.0)]).unwrap()
}

#[test]
fn validate_examples() {
    assert!(validate_cptp(&KrausChannel::identity(3)).ok);
    assert_eq!(validate_cptp(&KrausChannel::identity(3)).tp_slack, 0.0);
    assert!(validate_cptp(&bit_flip(0.1)).ok);
    let doubled = KrausChannel::new(vec![identity(2), identity(2)]).unwrap();
    let r = validate_cptp(&doubled);
    assert!(!r.ok);
    assert!(r.tp_slack > 0.5);
}

#[test]
fn kraus_shape_mismatch() {
    assert!(KrausChannel::new(vec![identity(2), identity(3)]).is_err());
    assert!(KrausChannel::new(vec![]).is_err());
}

#[test]
fn choi_of_unitary_is_rank_one() {
    let u = rotation2(0.4);
    let ch = KrausChannel::unitary(u.clone());
    let choi = to_choi(&ch);
    let v = col(&u);
    mat_close(&choi.matrix, &(&v * v.adjoint()), 1e-12);
    let can = from_choi(&choi).unwrap();
    assert_eq!(can.kraus.len(), 1);
    close(can.weights[0], 1.0, 1e-12);
}

#[test]
fn mixture_of_identity_and_rotation() {
    let theta: f64 = 0.2;
    let h = c(0.5f64.sqrt(), 0.0);
    let ch = KrausChannel::new(vec![identity(2) * h, rotation2(theta) * h]).unwrap();
    for can in [canonical(&ch).unwrap(), from_choi(&to_choi(&ch)).unwrap()] {
        close(can.weights[0], (1.0 + theta.cos()) / 2.0, 1e-12);
        close(can.weights[1], (1.0 - theta.cos()) / 2.0, 1e-12);
        let sum = identity(2) + rotation2(theta);
        // A₁ is parallel to I + R(θ).
        let ov = hs_inner(&sum, &can.kraus[0]).norm();
        close(ov, fro(&sum) * fro(&can.kraus[0]), 1e-10);
    }
}

#[test]
fn amplitude_damping_canonical() {
    let ch = amplitude_damping(2, 0.19).unwrap();
    let can = canonical(&ch).unwrap();
    close(can.weights[0], 0.905, 1e-12);
    close(can.weights[1], 0.095, 1e-12);
    mat_close(&can.kraus[0], &diag_real(&[1.0, 0.9]), 1e-12);
    mat_close(&can.kraus[1], &(ket_bra(2, 0, 1) * c(0.19f64.sqrt(), 0.0)), 1e-12);
    let l = lk(&ch, true).unwrap();
    mat_close(&l.a1, &diag_real(&[1.0, 0.9]), 1e-12);
}

#[test]
fn canonical_examples() {
    let can = canonical(&bit_flip(0.1)).unwrap();
    close(can.weights[0], 0.9, 1e-12);
    close(can.weights[1], 0.1, 1e-12);
    mat_close(&can.kraus[0], &(identity(2) * c(0.9f64.sqrt(), 0.0)), 1e-12);

    // Non-orthogonal depolarizing form: ρ ↦ pρ + (1−p)I/2 via {√p I, √((1−p)/2)|i⟩⟨j|}.
    let p: f64 = 0.9;
    let mut kraus = vec![identity(2) * c(p.sqrt(), 0.0)];
    for i in 0..2 {
        for j in 0..2 {
            kraus.push(ket_bra(2, i, j) * c(((1.0 - p) / 2.0).sqrt(), 0.0));
        }
    }
    let can = canonical(&KrausChannel::new(kraus).unwrap()).unwrap();
    close(can.weights[0], 0.925, 1e-12);
    mat_close(&can.kraus[0], &(identity(2) * c(0.925f64.sqrt(), 0.0)), 1e-10);
}

#[test]
fn degenerate_leading_is_flagged() {
    let h = c(0.5f64.sqrt(), 0.0);
    let ch = KrausChannel::new(vec![pauli_x() * h, pauli_y() * h]).unwrap();
    let can = canonical(&ch).unwrap();
    assert!(can.degenerate_leading);
    assert!(can.lk(false).is_ok());
    assert!(matches!(can.lk(true), Err(qpolar::Error::DegenerateLeading(_))));
}

#[test]
fn lk_examples() {
    let l = lk(&KrausChannel::unitary(rotation2(0.3)), true).unwrap();
    mat_close(&l.a1, &rotation2(0.3), 1e-12);
    close(l.weight, 1.0, 1e-12);
    let l = lk(&extremal_dephaser(4, 1).unwrap(), true).unwrap();
    mat_close(&l.a1, &diag_real(&[0.0, 1.0, 1.0, 1.0]), 1e-12);
    close(l.weight, 0.75, 1e-12);
}

#[test]
fn compose_examples() {
    let id = compose(&[KrausChannel::identity(2), KrausChannel::identity(2)]).unwrap();
    let can = canonical(&id).unwrap();
    assert_eq!(can.kraus.len(), 1);
    mat_close(&can.kraus[0], &identity(2), 1e-12);

    let ch = bit_flip(0.1);
    let two = compose(&[ch.clone(), ch.clone()]).unwrap();
    close(phi(&two, &identity(2)).unwrap(), 0.82, 1e-12);
    let l = lk(&ch, false).unwrap();
    let l2 = compose_lk(&[l.clone(), l]).unwrap();
    close(hs_inner(&identity(2), &l2.a1).norm_sqr() / 4.0, 0.81, 1e-12);

    let r = compose(&[KrausChannel::unitary(rotation2(0.1)), KrausChannel::unitary(rotation2(0.2))]).unwrap();
    mat_close(&r.kraus[0], &rotation2(0.3), 1e-12);
}

#[test]
fn compose_order_is_first_applied_first() {
    let a = KrausChannel::unitary(pauli_x());
    let b = amplitude_damping(2, 0.3).unwrap();
    let ab = compose(&[a.clone(), b.clone()]).unwrap();
    let rho = ket_bra(2, 0, 0);
    let direct = apply(&b, &apply(&a, &rho).unwrap()).unwrap();
    mat_close(&apply(&ab, &rho).unwrap(), &direct, 1e-12);
}

#[test]
fn compose_recanonicalizes_long_products() {
    let ch = depolarizing(2, 0.8).unwrap();
    let chs = vec![ch; 6];
    let out = compose(&chs).unwrap();
    assert!(out.len() <= 4);
    assert!(validate_cptp(&out).ok);
    close(phi(&out, &identity(2)).unwrap(), 0.8f64.powi(6) * 0.75 + 0.25, 1e-12);
}

#[test]
fn apply_examples() {
    let rho = random_density(&mut trial_rng(3, 0), 3);
    mat_close(&apply(&KrausChannel::identity(3), &rho).unwrap(), &rho, 1e-14);
    let p = 0.9;
    let out = apply(&depolarizing(2, p).unwrap(), &ket_bra(2, 0, 0)).unwrap();
    mat_close(&out, &diag_real(&[p + (1.0 - p) / 2.0, (1.0 - p) / 2.0]), 1e-12);
    let plus = from_real_rows(2, &[0.5, 0.5, 0.5, 0.5]);
    let out = apply(&dephasing(2, 0.5).unwrap(), &plus).unwrap();
    mat_close(&out, &diag_real(&[0.5, 0.5]), 1e-12);
}

#[test]
fn superoperator_examples() {
    let s = to_superop(&KrausChannel::identity(3));
    mat_close(&s.matrix, &identity(9), 1e-14);
    let u = rotation2(0.7) * c(0.0, 1.0).exp();
    let s = to_superop(&KrausChannel::unitary(u.clone()));
    mat_close(&s.matrix, &kron(&u.conjugate(), &u), 1e-14);

    let ch = random_cptp(2, 3, 11).unwrap();
    let s = to_superop(&ch);
    let mut rng = trial_rng(12, 0);
    for _ in 0..20 {
        let rho = random_density(&mut rng, 2);
        mat_close(&s.apply(&rho).unwrap(), &apply(&ch, &rho).unwrap(), 1e-10);
    }
}

#[test]
fn choi_validation_rejects_non_cp() {
    let mut choi = to_choi(&KrausChannel::identity(2));
    choi.matrix[(0, 0)] -= c(2.0, 0.0);
    assert!(matches!(from_choi(&choi), Err(qpolar::Error::NotCP(_)) | Err(qpolar::Error::NotTP(_))));
}

#[test]
fn canonical_roundtrip_random() {
    for seed in 0..20 {
        let ch = random_cptp(3, 5, seed).unwrap();
        let can = canonical(&ch).unwrap();
        let via_choi = from_choi(&to_choi(&ch)).unwrap();
        for (a, b) in can.weights.iter().zip(&via_choi.weights) {
            close(*a, *b, 1e-10);
        }
        mat_close(&to_choi(&can.to_channel()).matrix, &to_choi(&ch).matrix, 1e-10);
        for i in 0..can.kraus.len() {
            for j in 0..i {
                assert!(hs_inner(&can.kraus[i], &can.kraus[j]).norm() < 1e-10);
            }
        }
    }
}
