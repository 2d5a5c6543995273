//! Seeded verification suites. Every case draws from its own RNG stream
//! (seed, case index), so results do not depend on thread scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::*;
use crate::channel::KrausChannel;
use crate::error::Result;
use crate::genlib::{
    near_identity_cptp_rng, psd_lk_decoherent_rng, random_contraction, random_cptp_rng, random_hermitian,
    random_unitary_error_rng,
    trial_rng,
};
use crate::matcore::{c, check_norm_inequality, check_trace_inequality, check_vn_inequality, identity};
use crate::metrics::{infidelity, is_non_catastrophic, lk_gap_bounds, phi, upsilon};

/// Element infidelity cap of the theorem suite.
pub const MAX_ELEMENT_INFIDELITY: f64 = 1e-2;
/// Regime cap on m²·r_decoh².
pub const MAX_DECOH_REGIME: f64 = 0.1;
pub const THEOREM_DEPTHS: [usize; 5] = [2, 4, 8, 16, 32];

/// One row of a verification CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub case_id: String,
    pub theorem: String,
    pub observed: f64,
    pub lower: f64,
    pub upper: f64,
    /// min(observed − lower, upper − observed).
    pub slack: f64,
    pub holds: bool,
}

impl CaseResult {
    /// Main envelope plus one row per alternate bound.
    pub fn from_report(case_id: &str, r: &BoundReport) -> Vec<CaseResult> {
        let mut out = vec![CaseResult {
            case_id: case_id.to_string(),
            theorem: r.theorem.clone(),
            observed: r.observed,
            lower: r.lower,
            upper: r.upper,
            slack: r.slack_lower.min(r.slack_upper),
            holds: r.holds,
        }];
        for a in &r.alternates {
            let (lower, upper) = if a.upper { (f64::NEG_INFINITY, a.value) } else { (a.value, f64::INFINITY) };
            out.push(CaseResult {
                case_id: case_id.to_string(),
                theorem: format!("{}:{}", r.theorem, a.name),
                observed: r.observed,
                lower,
                upper,
                slack: if a.upper { a.value - r.observed } else { r.observed - a.value },
                holds: a.holds,
            });
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Theorems,
    Appendix,
}

/// Pass/fail counts per theorem identifier.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub cases: usize,
    pub failures: usize,
    pub per_theorem: std::collections::BTreeMap<String, (usize, usize)>,
}

impl Summary {
    pub fn of(rows: &[CaseResult]) -> Self {
        let mut s = Summary::default();
        for r in rows {
            s.cases += 1;
            let e = s.per_theorem.entry(r.theorem.clone()).or_insert((0, 0));
            e.0 += 1;
            if !r.holds {
                s.failures += 1;
                e.1 += 1;
            }
        }
        s
    }

    pub fn all_hold(&self) -> bool {
        self.failures == 0
    }
}

fn stream(d: usize, m: usize, trial: usize) -> u64 {
    ((d as u64) << 48) | ((m as u64) << 32) | trial as u64
}

/// Random channel with Φ > 1/2 and Υ² > 1/2, spread over the whole
/// non-catastrophic range: a unitary error with weight 1 − s mixed with a
/// random channel of random Kraus rank with weight s.
pub fn random_non_catastrophic<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<KrausChannel> {
    loop {
        let rank = rng.random_range(1..=d * d);
        let s: f64 = rng.random_range(0.0..0.6);
        let eps = rng.random_range(0.0..1.2);
        let v = random_unitary_error_rng(rng, d, eps)?;
        let noise = random_cptp_rng(rng, d, rank)?;
        let mut kraus = vec![v * c((1.0 - s).sqrt(), 0.0)];
        kraus.extend(noise.kraus.into_iter().map(|b| b * c(s.sqrt(), 0.0)));
        let ch = KrausChannel::new(kraus)?;
        if is_non_catastrophic(phi(&ch, &identity(d))?, upsilon(&ch)) {
            return Ok(ch);
        }
    }
}

/// Sandwich bounds on Υ² − w₁² and on the LK fidelity gap.
pub fn lemma_suite(d: usize, trials: usize, seed: u64) -> Result<Vec<CaseResult>> {
    let rows: Result<Vec<Vec<CaseResult>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, stream(d, 0, t));
            let ch = random_non_catastrophic(&mut rng, d)?;
            let (l1, l2) = lk_gap_bounds(&ch, &identity(d))?;
            let id = format!("d{d}-t{t}");
            let mut out = CaseResult::from_report(&id, &l1);
            if let Some(l2) = l2 {
                out.extend(CaseResult::from_report(&id, &l2));
            }
            Ok(out)
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// Trace, von Neumann and norm inequality predicates on random draws.
pub fn appendix_suite(d: usize, trials: usize, seed: u64) -> Result<Vec<CaseResult>> {
    let rows: Result<Vec<Vec<CaseResult>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, stream(d, 1, t));
            let id = format!("d{d}-t{t}");
            let (h1, h2) = (random_hermitian(&mut rng, d), random_hermitian(&mut rng, d));
            let tr = check_trace_inequality(&h1, &h2)?;
            let (a, b) = (random_contraction(&mut rng, d), random_contraction(&mut rng, d));
            let vn = check_vn_inequality(&a, &b)?;
            let (a2, b2) = (random_contraction(&mut rng, d), random_contraction(&mut rng, d));
            let nm = check_norm_inequality(&a2, &b2)?;
            let row = |name: &str, observed: f64, lower: f64, upper: f64, holds: bool| CaseResult {
                case_id: id.clone(),
                theorem: name.to_string(),
                observed,
                lower,
                upper,
                slack: (observed - lower).min(upper - observed),
                holds,
            };
            Ok(vec![
                row("trace_inequality", tr.lhs, tr.rhs, f64::INFINITY, tr.holds),
                row("vn_inequality", vn.lhs, f64::NEG_INFINITY, vn.rhs, vn.holds),
                row("norm_inequality", nm.middle, nm.lower, nm.upper, nm.holds),
            ])
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

fn within_regime(r: f64, r_decoh: f64, m: usize) -> bool {
    r <= MAX_ELEMENT_INFIDELITY && (m as f64 * r_decoh).powi(2) <= MAX_DECOH_REGIME
}

/// Near-identity element with infidelity ≤ 1e-2 and m²r_decoh² ≤ 0.1.
pub fn random_small_error<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Result<KrausChannel> {
    let id = identity(d);
    let mut eps = rng.random_range(0.02..0.25);
    let rank = rng.random_range(1..=d * d);
    loop {
        let ch = near_identity_cptp_rng(rng, d, rank, eps)?;
        let r = infidelity(phi(&ch, &id)?, d);
        let split = crate::polar::infidelity_split(&ch, &id)?;
        if within_regime(r, split.r_decoh, m) {
            return Ok(ch);
        }
        eps *= 0.7;
    }
}

/// Decoherent element with the same infidelity caps.
pub fn random_small_decoherent<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Result<KrausChannel> {
    let id = identity(d);
    let mut s = rng.random_range(0.02..0.25);
    loop {
        let ch = psd_lk_decoherent_rng(rng, d, s)?;
        let r = infidelity(phi(&ch, &id)?, d);
        if within_regime(r, r, m) {
            return Ok(ch);
        }
        s *= 0.7;
    }
}

fn theorem_case(d: usize, m: usize, t: usize, seed: u64) -> Result<Vec<CaseResult>> {
    let mut rng = trial_rng(seed, stream(d, m, t));
    let id = format!("d{d}-m{m}-t{t}");
    let general = CircuitSpec::new((0..m).map(|_| random_small_error(&mut rng, d, m)).collect::<Result<_>>()?, None)?;
    let decoh =
        CircuitSpec::new((0..m).map(|_| random_small_decoherent(&mut rng, d, m)).collect::<Result<_>>()?, None)?;
    let theta = rng.random_range(0.0..0.1);
    let v = random_unitary_error_rng(&mut rng, d, theta)?;

    let mut out = Vec::new();
    out.extend(CaseResult::from_report(&id, &thm1_uni_evo(&general)?));
    out.extend(CaseResult::from_report(&id, &thm2_fid_evo(&general)?));
    let t5 = thm5_unitarity_decay(&general, None)?;
    for r in [&t5.multiplicative, &t5.monotonicity, &t5.subadditivity] {
        out.extend(CaseResult::from_report(&id, r));
    }
    out.extend(CaseResult::from_report(&id, &thm6_fidelity_decay(&decoh)?));
    out.extend(CaseResult::from_report(&id, &thm8_equable_composition(&v, &decoh)?));
    let mut general_t8 = thm8_circuit(&general)?;
    general_t8.theorem = "thm8_circuit".into();
    out.extend(CaseResult::from_report(&id, &general_t8));
    out.extend(CaseResult::from_report(&id, &thm9_max_correction_multi(&general)?));
    if m <= 16 {
        let (mono, sub) = thm4_decoherent_features(&decoh, &v)?;
        out.extend(CaseResult::from_report(&id, &mono));
        out.extend(CaseResult::from_report(&id, &sub));
    }
    Ok(out)
}

/// Random circuits at every depth in `depths`; `trials` circuits per depth.
pub fn theorem_suite(d: usize, depths: &[usize], trials: usize, seed: u64) -> Result<Vec<CaseResult>> {
    let jobs: Vec<(usize, usize)> = depths.iter().flat_map(|&m| (0..trials).map(move |t| (m, t))).collect();
    let rows: Result<Vec<Vec<CaseResult>>> =
        jobs.into_par_iter().map(|(m, t)| theorem_case(d, m, t, seed)).collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// Correction interval of a single random channel, with the optimizer.
pub fn correction_case(d: usize, t: usize, seed: u64, budget: usize) -> Result<(Thm7Report, Vec<CaseResult>)> {
    let mut rng = trial_rng(seed, stream(d, 7, t));
    let ch = random_non_catastrophic(&mut rng, d)?;
    let r = thm7_max_correction(&ch, &identity(d), budget)?;
    let rows = CaseResult::from_report(&format!("d{d}-t{t}"), &r.report);
    Ok((r, rows))
}

pub fn correction_suite(d: usize, trials: usize, seed: u64, budget: usize) -> Result<Vec<CaseResult>> {
    let rows: Result<Vec<Vec<CaseResult>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (r, mut rows) = correction_case(d, t, seed, budget)?;
            rows.push(CaseResult {
                case_id: format!("d{d}-t{t}"),
                theorem: "thm7:optimizer".into(),
                observed: r.report.observed + r.improvement.max(0.0),
                lower: f64::NEG_INFINITY,
                upper: r.report.upper,
                slack: r.report.upper - r.report.observed - r.improvement.max(0.0),
                holds: r.optimizer_within_upper,
            });
            Ok(rows)
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

pub fn run_suite(suite: Suite, dims: &[usize], trials: usize, seed: u64) -> Result<Vec<CaseResult>> {
    let mut rows = Vec::new();
    for &d in dims {
        match suite {
            Suite::Lemmas => rows.extend(lemma_suite(d, trials, seed)?),
            Suite::Appendix => rows.extend(appendix_suite(d, trials, seed)?),
            Suite::Theorems => {
                rows.extend(theorem_suite(d, &THEOREM_DEPTHS, trials, seed)?);
                rows.extend(correction_suite(d, trials, seed, 500)?);
            }
        }
    }
    Ok(rows)
}

/// CSV with 17 significant digits; infinite bounds print as `inf`/`-inf`.
pub fn to_csv(rows: &[CaseResult]) -> String {
    let mut s = String::from("case_id,theorem,observed,lower,upper,slack,holds\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.case_id,
            csv_field(&r.theorem),
            fmt_f64(r.observed),
            fmt_f64(r.lower),
            fmt_f64(r.upper),
            fmt_f64(r.slack),
            r.holds
        ));
    }
    s
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}
