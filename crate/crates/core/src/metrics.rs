//! Process fidelity Φ, average gate fidelity F, Υ and unitarity u, the
//! two LK gap sandwiches, and Haar Monte Carlo estimators.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::BoundReport;
use crate::channel::{canonical, CanonicalDecomposition, KrausChannel};
use crate::error::{Error, Result};
use crate::genlib::{haar_state, trial_rng};
use crate::matcore::{fro_sqr, hs_inner, identity, unitarity_defect, ComplexMatrix, C64};

const UNITARY_TOL: f64 = 1e-9;

fn check_target(ch: &KrausChannel, u: &ComplexMatrix) -> Result<()> {
    if u.nrows() != ch.dim || u.ncols() != ch.dim {
        return Err(Error::DimensionMismatch("target dimension".into()));
    }
    let dev = unitarity_defect(u);
    if dev > UNITARY_TOL {
        return Err(Error::TargetNotUnitary(dev));
    }
    Ok(())
}

/// Σ_i |tr(U†A_i)|²/d² for any Kraus list; the value does not depend on
/// the representation.
pub fn phi_unchecked(kraus: &[ComplexMatrix], u: &ComplexMatrix) -> f64 {
    let d = u.nrows() as f64;
    kraus.iter().map(|a| hs_inner(u, a).norm_sqr()).sum::<f64>() / (d * d)
}

/// |tr(U†A)|²/d² for a single operator.
pub fn overlap_sq(a: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    let d = u.nrows() as f64;
    hs_inner(u, a).norm_sqr() / (d * d)
}

/// Process fidelity Φ(A, U).
pub fn phi(ch: &KrausChannel, target: &ComplexMatrix) -> Result<f64> {
    check_target(ch, target)?;
    Ok(phi_unchecked(&ch.kraus, target).clamp(0.0, 1.0))
}

/// Φ averaged over the Weyl operator basis: (1/d²) Σ_P ⟨U P U†, A(P)⟩/d.
/// Equal to [`phi`]; kept as an independent route.
pub fn phi_basis_average(ch: &KrausChannel, target: &ComplexMatrix) -> Result<f64> {
    check_target(ch, target)?;
    let d = ch.dim;
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..d {
        for b in 0..d {
            let p = crate::genlib::weyl(d, a, b);
            let ap = crate::channel::apply(ch, &p)?;
            let up = target * &p * target.adjoint();
            acc += hs_inner(&up, &ap);
        }
    }
    Ok(acc.re / (d * d * d) as f64)
}

/// (dΦ+1)/(d+1).
pub fn avg_fidelity(phi_value: f64, d: usize) -> f64 {
    let d = d as f64;
    (d * phi_value + 1.0) / (d + 1.0)
}

/// 1 − F.
pub fn infidelity(phi_value: f64, d: usize) -> f64 {
    let d = d as f64;
    d * (1.0 - phi_value) / (d + 1.0)
}

/// Υ from the Gram matrix of any Kraus list: Υ = ‖G‖/d, which equals
/// sqrt(Σ w_i²) because G shares its spectrum with the Choi matrix.
pub fn upsilon(ch: &KrausChannel) -> f64 {
    fro_sqr(&ch.gram()).sqrt() / ch.dim as f64
}

/// Υ from canonical weights.
pub fn upsilon_from_weights(weights: &[f64]) -> f64 {
    weights.iter().map(|w| w * w).sum::<f64>().sqrt()
}

/// u = (d²Υ² − 1)/(d² − 1).
pub fn unitarity(upsilon_value: f64, d: usize) -> f64 {
    let d2 = (d * d) as f64;
    (d2 * upsilon_value * upsilon_value - 1.0) / (d2 - 1.0)
}

/// Complex M-fidelity ⟨A(M), U M U†⟩/‖M‖² and its real part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MFidelity {
    pub re: f64,
    pub im: f64,
}

pub fn m_fidelity(ch: &KrausChannel, target: &ComplexMatrix, m: &ComplexMatrix) -> Result<MFidelity> {
    check_target(ch, target)?;
    let n = fro_sqr(m);
    if n == 0.0 {
        return Err(Error::ZeroOperator);
    }
    let am = crate::channel::apply(ch, m)?;
    let um = target * m * target.adjoint();
    let v = hs_inner(&am, &um) / n;
    Ok(MFidelity { re: v.re, im: v.im })
}

/// Φ > 1/2 and Υ² > 1/2.
pub fn non_catastrophic(ch: &KrausChannel, target: &ComplexMatrix) -> Result<bool> {
    let ph = phi(ch, target)?;
    let up = upsilon(ch);
    Ok(is_non_catastrophic(ph, up))
}

pub fn is_non_catastrophic(phi_value: f64, upsilon_value: f64) -> bool {
    phi_value > 0.5 && upsilon_value * upsilon_value > 0.5
}

/// Figures of merit of a channel against a unitary target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub dim: usize,
    pub phi: f64,
    pub avg_fidelity: f64,
    pub infidelity: f64,
    pub upsilon: f64,
    pub unitarity: f64,
    pub non_catastrophic: bool,
    /// Φ of the LK map, |tr(U†A₁)|²/d².
    pub lk_phi: f64,
    /// w₁.
    pub lk_upsilon: f64,
}

impl MetricsReport {
    pub fn compute(ch: &KrausChannel, target: &ComplexMatrix) -> Result<Self> {
        let can = canonical(ch)?;
        Self::from_canonical(&can, target)
    }

    pub fn from_canonical(can: &CanonicalDecomposition, target: &ComplexMatrix) -> Result<Self> {
        let ch = can.to_channel();
        let d = can.dim;
        let ph = phi(&ch, target)?;
        let up = can.upsilon();
        Ok(Self {
            dim: d,
            phi: ph,
            avg_fidelity: avg_fidelity(ph, d),
            infidelity: infidelity(ph, d),
            upsilon: up,
            unitarity: unitarity(up, d),
            non_catastrophic: is_non_catastrophic(ph, up),
            lk_phi: overlap_sq(can.leading(), target),
            lk_upsilon: can.weights[0],
        })
    }
}

/// Lemma 1 sandwich 0 ≤ Υ² − w₁² ≤ (1 − Υ²)², and the Lemma 2 sandwich
/// 0 ≤ Φ − |tr(U†A₁)|²/d² ≤ (1 − Υ²)(1 − Φ), the latter only for
/// non-catastrophic channels.
pub fn lk_gap_bounds(ch: &KrausChannel, target: &ComplexMatrix) -> Result<(BoundReport, Option<BoundReport>)> {
    let can = canonical(ch)?;
    let ch = can.to_channel();
    let ph = phi(&ch, target)?;
    let up2 = can.weights.iter().map(|w| w * w).sum::<f64>();
    let w1 = can.weights[0];
    let l1 = BoundReport::new("lemma1", up2 - w1 * w1, 0.0, vec![("(1-Y^2)^2".into(), (1.0 - up2).powi(2))], false);
    let l2 = if is_non_catastrophic(ph, up2.sqrt()) {
        let lk_phi = overlap_sq(can.leading(), target);
        Some(BoundReport::new(
            "lemma2",
            ph - lk_phi,
            0.0,
            vec![("(1-Y^2)(1-Phi)".into(), (1.0 - up2) * (1.0 - ph))],
            false,
        ))
    } else {
        None
    };
    Ok((l1, l2))
}

/// Monte Carlo estimate with its standard error (sample SD/√n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

/// Neumaier-compensated sum; constant-valued samples must average exactly.
fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

fn summarize(samples: &[f64]) -> McEstimate {
    let n = samples.len();
    let mean = compensated_sum(samples.iter().copied()) / n as f64;
    let var = compensated_sum(samples.iter().map(|x| (x - mean).powi(2))) / (n as f64 - 1.0);
    McEstimate { mean, std_err: (var / n as f64).sqrt(), n }
}

fn check_samples(n: usize) -> Result<()> {
    if n < 100 {
        return Err(Error::ParamOutOfRange(format!("n_samples = {n} < 100")));
    }
    Ok(())
}

/// Haar average of the pure-state fidelity ⟨ψ|U†A(ψψ†)U|ψ⟩.
pub fn haar_fidelity_mc(ch: &KrausChannel, target: &ComplexMatrix, n_samples: usize, seed: u64) -> Result<McEstimate> {
    check_target(ch, target)?;
    check_samples(n_samples)?;
    let d = ch.dim;
    let samples: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let psi = haar_state(&mut rng, d);
            let upsi = target * &psi;
            ch.kraus
                .iter()
                .map(|a| (upsi.adjoint() * (a * &psi))[(0, 0)].norm_sqr())
                .sum::<f64>()
        })
        .collect();
    Ok(summarize(&samples))
}

/// Haar estimate of the unitarity (d²Υ² − 1)/(d² − 1).
///
/// Uses E‖A(ψψ†)‖² = (d²Υ² + ‖A(I)‖²)/(d(d+1)). For unital channels each
/// sample equals ‖A(ψψ† − I/d)‖²/‖ψψ† − I/d‖²; for non-unital channels
/// that purity ratio would miss the ‖A(I)‖² shift.
pub fn haar_unitarity_mc(ch: &KrausChannel, n_samples: usize, seed: u64) -> Result<McEstimate> {
    check_samples(n_samples)?;
    let d = ch.dim;
    let df = d as f64;
    let shift = fro_sqr(&crate::channel::apply(ch, &identity(d))?) + 1.0;
    let samples: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let psi = haar_state(&mut rng, d);
            let rho = &psi * psi.adjoint();
            let out = crate::channel::apply(ch, &rho).expect("dimension checked");
            (df * (df + 1.0) * fro_sqr(&out) - shift) / (df * df - 1.0)
        })
        .collect();
    Ok(summarize(&samples))
}
