//! Channel polar decomposition A = V∘D, decoherence, equability
//! constants, the coherent/decoherent infidelity split and channel labels.

use serde::Serialize;

use crate::channel::{canonical, left_multiply, right_multiply, CanonicalDecomposition, KrausChannel};
use crate::error::{Error, Result};
use crate::matcore::{
    c, eigvalsh, hermitian_defect, identity, polar_decompose, ComplexMatrix, MatrixPolar,
};
use crate::metrics::{infidelity, is_non_catastrophic, overlap_sq, phi, unitarity};

/// Default equability margin κ.
pub const DEFAULT_KAPPA: f64 = 0.1;
const ZERO_DEFECT: f64 = 1e-12;

/// Unitary and decoherent factors of a channel.
#[derive(Debug, Clone)]
pub struct ChannelPolar {
    /// Polar unitary of A₁ with tr V ∈ ℝ₊ whenever that phase is defined.
    pub v: ComplexMatrix,
    pub coherent: KrausChannel,
    /// D with A = V∘D.
    pub decoherent_left: KrausChannel,
    /// D′ with A = D′∘V.
    pub decoherent_right: KrausChannel,
    /// A₁ full rank and w₁ not degenerate.
    pub unique: bool,
    /// Υ² > 1/2; the factorization is only meaningful in that regime.
    pub upsilon_sq_above_half: bool,
    pub canonical: CanonicalDecomposition,
    pub a1_polar: MatrixPolar,
}

/// Factor a channel into a unitary channel and a decoherent channel.
pub fn channel_polar(ch: &KrausChannel, strict: bool) -> Result<ChannelPolar> {
    let can = canonical(ch)?;
    channel_polar_from_canonical(can, strict)
}

pub fn channel_polar_from_canonical(can: CanonicalDecomposition, strict: bool) -> Result<ChannelPolar> {
    let lk = can.lk(strict)?;
    let p = polar_decompose(&lk.a1)?;
    // The raw factor satisfies A₁ = V_raw·|A₁| exactly, so V_raw†A₁ = |A₁|.
    let v_raw = p.raw_unitary();
    let vd = v_raw.adjoint();
    let ch = can.to_channel();
    let decoherent_left = left_multiply(&vd, &ch);
    let decoherent_right = right_multiply(&ch, &vd);
    let up2 = can.weights.iter().map(|w| w * w).sum::<f64>();
    Ok(ChannelPolar {
        v: p.unitary.clone(),
        coherent: KrausChannel::unitary(p.unitary.clone()),
        decoherent_left,
        decoherent_right,
        unique: p.full_rank() && !can.degenerate_leading,
        upsilon_sq_above_half: up2 > 0.5,
        canonical: can,
        a1_polar: p,
    })
}

/// LK operator Hermitian and positive semidefinite within `tol`.
pub fn is_decoherent(ch: &KrausChannel, tol: f64) -> Result<bool> {
    let can = canonical(ch)?;
    lk_is_psd(can.leading(), tol)
}

pub fn lk_is_psd(a1: &ComplexMatrix, tol: f64) -> Result<bool> {
    if hermitian_defect(a1) > tol {
        return Ok(false);
    }
    let h = (a1 + a1.adjoint()) * c(0.5, 0.0);
    let vals = eigvalsh(&h)?;
    Ok(vals.last().copied().unwrap_or(0.0) >= -tol)
}

/// Strict-sense (Γ) and wide-sense (γ) equability constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquabilityReport {
    /// Singular values of A₁, descending.
    pub sigma: Vec<f64>,
    /// Re λ(V) with tr V ∈ ℝ₊, descending.
    pub lambda_re: Vec<f64>,
    pub gamma_decoh_sse: f64,
    pub gamma_coh_sse: f64,
    pub gamma_decoh: f64,
    pub gamma_coh: f64,
    /// κ/√E[1−σ].
    pub threshold_decoh: f64,
    /// κ/√E[1−Re λ].
    pub threshold_coh: f64,
    pub kappa: f64,
    pub sse_ok: bool,
    pub wse_ok: bool,
}

#[derive(Debug, Clone, Copy)]
struct Spread {
    mean_defect: f64,
    worst: f64,
    sd: f64,
}

fn spread(xs: &[f64]) -> Spread {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mean_defect = 1.0 - mean;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    if mean_defect.abs() <= ZERO_DEFECT {
        return Spread { mean_defect: mean_defect.max(0.0), worst: 0.0, sd: 0.0 };
    }
    Spread { mean_defect, worst: (1.0 - min) / mean_defect, sd: var.sqrt() / mean_defect }
}

/// (Γ, γ, E[1−x]) of a spectrum x.
pub fn spectral_spread(xs: &[f64]) -> (f64, f64, f64) {
    let s = spread(xs);
    (s.worst, s.sd, s.mean_defect)
}

fn threshold(kappa: f64, mean_defect: f64) -> f64 {
    if mean_defect <= 0.0 {
        f64::INFINITY
    } else {
        kappa / mean_defect.sqrt()
    }
}

/// Equability constants from the spectra directly; usable without any
/// matrix (large analytic examples).
pub fn equability_constants(sigma: &[f64], lambda_re: &[f64], kappa: f64) -> EquabilityReport {
    let s = spread(sigma);
    let l = spread(lambda_re);
    let td = threshold(kappa, s.mean_defect);
    let tc = threshold(kappa, l.mean_defect);
    EquabilityReport {
        sigma: sigma.to_vec(),
        lambda_re: lambda_re.to_vec(),
        gamma_decoh_sse: s.worst,
        gamma_coh_sse: l.worst,
        gamma_decoh: s.sd,
        gamma_coh: l.sd,
        threshold_decoh: td,
        threshold_coh: tc,
        kappa,
        sse_ok: s.worst < td && l.worst < tc,
        wse_ok: s.sd < td && l.sd < tc,
    }
}

/// Re λ(V) for unitary V, as eigenvalues of (V + V†)/2.
pub fn real_eigenparts(v: &ComplexMatrix) -> Result<Vec<f64>> {
    eigvalsh(&((v + v.adjoint()) * c(0.5, 0.0)))
}

pub fn equability(ch: &KrausChannel, kappa: f64) -> Result<EquabilityReport> {
    let pol = channel_polar(ch, false)?;
    equability_from_polar(&pol, kappa)
}

pub fn equability_from_polar(pol: &ChannelPolar, kappa: f64) -> Result<EquabilityReport> {
    if !pol.a1_polar.phase_fixed {
        return Err(Error::PhaseUndefined(pol.a1_polar.raw_unitary().trace().norm()));
    }
    let lambda = real_eigenparts(&pol.v)?;
    Ok(equability_constants(&pol.a1_polar.singular_values, &lambda, kappa))
}

/// Total, coherent and decoherent infidelities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfidelitySplit {
    pub r: f64,
    pub r_coh: f64,
    pub r_decoh: f64,
    /// (d − sqrt((d²−1)u + 1))/(d + 1).
    pub r_decoh_from_u: f64,
    /// r_coh/r.
    pub coherence_level: f64,
    /// (1 − Υ)/(1 − Φ).
    pub decoherent_fraction_estimate: f64,
    /// 1 − (1 − Υ)/(1 − Φ).
    pub coherence_level_estimate: f64,
    /// r − r_coh − r_decoh.
    pub residual: f64,
}

pub fn infidelity_split(ch: &KrausChannel, target: &ComplexMatrix) -> Result<InfidelitySplit> {
    let pol = channel_polar(ch, false)?;
    infidelity_split_from_polar(&pol, target)
}

pub fn infidelity_split_from_polar(pol: &ChannelPolar, target: &ComplexMatrix) -> Result<InfidelitySplit> {
    let ch = pol.canonical.to_channel();
    let d = ch.dim;
    let ph = phi(&ch, target)?;
    let up = pol.canonical.upsilon();
    if !is_non_catastrophic(ph, up) {
        return Err(Error::NotNonCatastrophic(format!("Phi = {ph}, Upsilon^2 = {}", up * up)));
    }
    let r = infidelity(ph, d);
    let r_coh = infidelity(overlap_sq(&pol.v, target), d);
    let r_decoh = infidelity(phi(&pol.decoherent_left, &identity(d))?, d);
    let df = d as f64;
    let u = unitarity(up, d);
    let r_decoh_from_u = (df - ((df * df - 1.0) * u + 1.0).max(0.0).sqrt()) / (df + 1.0);
    let coherence_level = if r > 0.0 { r_coh / r } else { 0.0 };
    let decoherent_fraction_estimate = if ph < 1.0 { (1.0 - up) / (1.0 - ph) } else { 0.0 };
    Ok(InfidelitySplit {
        r,
        r_coh,
        r_decoh,
        r_decoh_from_u,
        coherence_level,
        decoherent_fraction_estimate,
        coherence_level_estimate: if ph < 1.0 { 1.0 - decoherent_fraction_estimate } else { 0.0 },
        residual: r - r_coh - r_decoh,
    })
}

/// Coherent infidelity at most c·r².
pub fn is_decoherence_limited(ch: &KrausChannel, target: &ComplexMatrix, c_factor: f64) -> Result<bool> {
    let s = infidelity_split(ch, target)?;
    Ok(s.r_coh <= c_factor * s.r * s.r)
}

/// Category of a channel in the coherent/decoherent and equability sense.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub label: String,
    pub decoherent: bool,
    pub coherence_level: f64,
    pub sse_ok: bool,
    pub wse_ok: bool,
    /// Γ_decoh fails its threshold.
    pub extremal_dephaser: bool,
    /// Γ_coh fails its threshold.
    pub extremal_unitary: bool,
}

pub fn classify(ch: &KrausChannel, target: &ComplexMatrix, kappa: f64) -> Result<Classification> {
    let pol = channel_polar(ch, false)?;
    let eq = equability_from_polar(&pol, kappa)?;
    let decoherent = lk_is_psd(pol.canonical.leading(), 1e-9)?;
    let split = infidelity_split_from_polar(&pol, target)?;
    let kind = if decoherent {
        "Decoherent"
    } else if split.r_decoh <= 1e-12 {
        "Coherent"
    } else {
        "Mixed"
    };
    let equable = if eq.sse_ok {
        "SSE"
    } else if eq.wse_ok {
        "WSE"
    } else {
        "non-equable"
    };
    Ok(Classification {
        label: format!("{kind}, {equable}"),
        decoherent,
        coherence_level: split.coherence_level,
        sse_ok: eq.sse_ok,
        wse_ok: eq.wse_ok,
        extremal_dephaser: eq.gamma_decoh_sse >= eq.threshold_decoh,
        extremal_unitary: eq.gamma_coh_sse >= eq.threshold_coh,
    })
}
