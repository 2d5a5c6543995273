use qpolar::genlib::{random_contraction, random_hermitian, random_unitary, trial_rng};
use qpolar::matcore::*;

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

fn mat_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
    let e = fro(&(a - b));
    assert!(e <= tol, "matrices differ by {e}");
}

#[test]
fn eig_of_diagonal() {
    let e = hermitian_eig(&diag_real(&[3.0, 1.0, 2.0])).unwrap();
    assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
    for (k, i) in [0usize, 2, 1].into_iter().enumerate() {
        close(e.vectors[(i, k)].norm(), 1.0, 1e-14);
    }
}

#[test]
fn eig_of_pauli_x() {
    let e = hermitian_eig(&pauli_x()).unwrap();
    close(e.values[0], 1.0, 1e-14);
    close(e.values[1], -1.0, 1e-14);
    let v = e.vectors.column(0);
    close((v[0] - v[1]).norm(), 0.0, 1e-14);
    close(v[0].norm(), 0.5f64.sqrt(), 1e-14);
}

#[test]
fn eig_reconstructs_random() {
    let mut rng = trial_rng(1, 0);
    for _ in 0..20 {
        let m = random_hermitian(&mut rng, 8);
        let e = hermitian_eig(&m).unwrap();
        mat_close(&e.reconstruct(), &m, 1e-9 * fro(&m));
        mat_close(&(e.vectors.adjoint() * &e.vectors), &identity(8), 1e-10);
        close(e.values.iter().sum::<f64>(), m.trace().re, 1e-9 * m.trace().re.abs() + 1e-12);
        let u = random_unitary(8, 3);
        let conj = eigvalsh(&(&u * &m * u.adjoint())).unwrap();
        for (a, b) in e.values.iter().zip(&conj) {
            close(*a, *b, 1e-9);
        }
    }
}

#[test]
fn eig_rejects_non_hermitian() {
    let m = from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]);
    assert!(matches!(hermitian_eig(&m), Err(qpolar::Error::NotHermitian(_))));
}

#[test]
fn degenerate_blocks_are_deterministic() {
    let u = random_unitary(4, 9);
    let m = &u * diag_real(&[1.0, 1.0, 0.5, 0.5]) * u.adjoint();
    let a = hermitian_eig(&m).unwrap();
    let b = hermitian_eig(&m.clone()).unwrap();
    assert!(a.degenerate);
    assert_eq!(a.vectors, b.vectors);
}

#[test]
fn polar_identity() {
    let p = polar_decompose(&identity(3)).unwrap();
    mat_close(&p.unitary, &identity(3), 1e-14);
    mat_close(&p.psd, &identity(3), 1e-14);
}

#[test]
fn polar_of_spiral_lk() {
    let a: f64 = 0.3;
    let ph = a.powi(3) / 2.0;
    let h = (a / 2.0).cos();
    let m = diag_complex(&[c(a.cos(), 0.0), C64::from_polar(h, ph), C64::from_polar(h, -ph)]);
    let p = polar_decompose(&m).unwrap();
    mat_close(&p.unitary, &diag_complex(&[c(1.0, 0.0), C64::from_polar(1.0, ph), C64::from_polar(1.0, -ph)]), 1e-12);
    mat_close(&p.psd, &diag_real(&[a.cos(), h, h]), 1e-12);
    assert!(p.phase_fixed);
}

#[test]
fn polar_rank_deficient_completion() {
    let p = polar_decompose(&diag_real(&[0.0, 1.0])).unwrap();
    mat_close(&p.psd, &diag_real(&[0.0, 1.0]), 1e-14);
    mat_close(&p.unitary, &identity(2), 1e-12);
    assert!(!p.full_rank());
}

#[test]
fn polar_random_invariants() {
    let mut rng = trial_rng(2, 0);
    for _ in 0..20 {
        let a = random_contraction(&mut rng, 4);
        let p = polar_decompose(&a).unwrap();
        assert!(unitarity_defect(&p.unitary) < 1e-10);
        mat_close(&p.reconstruct(), &a, 1e-9 * fro(&a));
        let ev = eigvalsh(&p.psd).unwrap();
        let sv = singular_values(&a).unwrap();
        for (x, y) in ev.iter().zip(&sv) {
            close(*x, *y, 1e-9);
        }
        let q = polar_decompose(&a).unwrap();
        assert_eq!(p.unitary, q.unitary);
    }
}

#[test]
fn trace_inequality_examples() {
    let z = pauli_z();
    let r = check_trace_inequality(&z, &z).unwrap();
    close(r.lhs, 1.0, 1e-14);
    close(r.rhs, -1.0, 1e-14);
    assert!(r.holds);
    let r = check_trace_inequality(&identity(2), &identity(2)).unwrap();
    close(r.lhs, 1.0, 1e-14);
    close(r.rhs, 1.0, 1e-14);
    assert!(r.holds);
}

#[test]
fn vn_inequality_examples() {
    let r = check_vn_inequality(&identity(2), &identity(2)).unwrap();
    close(r.lhs, 1.0, 1e-14);
    close(r.rhs, 1.0, 1e-14);
    let r = check_vn_inequality(&pauli_x(), &pauli_z()).unwrap();
    close(r.lhs, 0.0, 1e-14);
    close(r.rhs, 1.0, 1e-14);
    assert!(r.holds);
}

#[test]
fn norm_inequality_examples() {
    let r = check_norm_inequality(&identity(2), &identity(2)).unwrap();
    assert!(r.holds);
    close(r.lower, 1.0, 1e-14);
    close(r.middle, 1.0, 1e-14);
    let r = check_norm_inequality(&diag_real(&[1.0, 0.0]), &diag_real(&[0.0, 1.0])).unwrap();
    close(r.lower, 0.0, 1e-14);
    close(r.middle, 0.0, 1e-14);
    close(r.upper, 0.5, 1e-14);
    assert!(r.holds);
    let big = identity(2) * c(1.5, 0.0);
    assert!(matches!(check_norm_inequality(&big, &identity(2)), Err(qpolar::Error::NotContraction(_))));
}

#[test]
fn inequalities_on_random_draws() {
    for d in [2, 3, 4, 5] {
        let mut rng = trial_rng(40 + d as u64, 0);
        for _ in 0..200 {
            let (h1, h2) = (random_hermitian(&mut rng, d), random_hermitian(&mut rng, d));
            assert!(check_trace_inequality(&h1, &h2).unwrap().holds);
            let (a, b) = (random_contraction(&mut rng, d), random_contraction(&mut rng, d));
            assert!(check_vn_inequality(&a, &b).unwrap().holds);
            assert!(check_norm_inequality(&a, &b).unwrap().holds);
        }
    }
}

#[test]
fn non_finite_rejected() {
    let mut m = identity(2);
    m[(0, 1)] = c(f64::NAN, 0.0);
    assert!(matches!(polar_decompose(&m), Err(qpolar::Error::NonFinite)));
}
