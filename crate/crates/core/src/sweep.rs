//! Depth sweeps of a repeated circuit element, and the singular-value
//! dump of a randomized extremal dephaser.
//!
//! For A^m the superoperator is raised incrementally, so a sweep to depth
//! 1000 costs one d²×d² product per depth. The decay-law scalars of
//! identical elements scale linearly in m (sums) or geometrically
//! (products), and the coherent factor is V^m.

use serde::{Deserialize, Serialize};

use crate::bounds::{coherent_envelope, gamma_coh_of, thm8_eval, DecayInputs, ElementStats};
use crate::channel::{to_superop, KrausChannel};
use crate::error::{Error, Result};
use crate::genlib::{extremal_dephaser_random, make_channel, trial_rng, Family, FamilySpec};
use crate::matcore::{fro, identity};
use crate::metrics::{is_non_catastrophic, overlap_sq, unitarity};
use crate::polar::{channel_polar, equability_constants, spectral_spread};
use crate::verify::{csv_field, fmt_f64};

pub const KNOWN_METRICS: [&str; 9] = [
    "phi",
    "upsilon",
    "unitarity",
    "prod_upsilon",
    "thm8_lower",
    "thm8_upper",
    "decoherent_envelope",
    "coherent_envelope_lower",
    "non_catastrophic",
];

/// Repeated-element depth sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Label written in the `series` column.
    #[serde(default)]
    pub series: String,
    pub element: FamilySpec,
    /// Largest depth; rows are written for m = 1..=depth.
    pub depth: usize,
    /// Columns to write; all of `KNOWN_METRICS` when empty.
    #[serde(default)]
    pub metrics: Vec<String>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::ParamOutOfRange("depth must be >= 1".into()));
        }
        if let Some(m) = self.metrics.iter().find(|m| !KNOWN_METRICS.contains(&m.as_str())) {
            return Err(Error::ParamOutOfRange(format!("unknown metric {m}")));
        }
        Ok(())
    }

    fn columns(&self) -> Vec<&str> {
        if self.metrics.is_empty() {
            KNOWN_METRICS.to_vec()
        } else {
            KNOWN_METRICS.iter().copied().filter(|k| self.metrics.iter().any(|m| m == k)).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub series: String,
    pub m: usize,
    pub phi: f64,
    pub upsilon: f64,
    pub unitarity: f64,
    pub prod_upsilon: f64,
    /// Φ(V^m, I)·Φ(D, I)^m.
    pub thm8_center: f64,
    /// Half-width of the decay-law band.
    pub thm8_halfwidth: f64,
    pub thm8_lower: f64,
    pub thm8_upper: f64,
    /// Φ(D, I)^m.
    pub decoherent_envelope: f64,
    pub coherent_envelope_lower: f64,
    pub non_catastrophic: bool,
}

impl SweepRow {
    fn value(&self, key: &str) -> String {
        match key {
            "phi" => fmt_f64(self.phi),
            "upsilon" => fmt_f64(self.upsilon),
            "unitarity" => fmt_f64(self.unitarity),
            "prod_upsilon" => fmt_f64(self.prod_upsilon),
            "thm8_lower" => fmt_f64(self.thm8_lower),
            "thm8_upper" => fmt_f64(self.thm8_upper),
            "decoherent_envelope" => fmt_f64(self.decoherent_envelope),
            "coherent_envelope_lower" => fmt_f64(self.coherent_envelope_lower),
            "non_catastrophic" => self.non_catastrophic.to_string(),
            _ => unreachable!("validated metric name"),
        }
    }
}

/// Rows of a sweep. A stopping sweep ends after the first depth at which the
/// composition is catastrophic (that row is included and flagged).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Depth at which Φ(A^m) or Υ²(A^m) first dropped to 1/2 or below.
    pub catastrophic_at: Option<usize>,
}

/// Sweep of A^m, m = 1..=depth, against the identity target.
pub fn sweep_element(series: &str, ch: &KrausChannel, depth: usize, stop: bool) -> Result<SweepResult> {
    let d = ch.dim;
    let df = d as f64;
    let id = identity(d);
    let e = ElementStats::compute(ch, &id)?;
    if !e.non_catastrophic() {
        return Err(Error::NotNonCatastrophic(format!("element: Phi = {}", e.phi)));
    }
    let ratio = e.phi / e.upsilon;
    let v = channel_polar(ch, false)?.a1_polar.raw_unitary();
    let s = to_superop(ch).matrix;

    let mut s_pow = s.clone();
    let mut lk_pow = e.a1.clone();
    let mut v_pow = v.clone();
    let mut rows = Vec::with_capacity(depth);
    let mut catastrophic_at = None;
    for m in 1..=depth {
        if m > 1 {
            s_pow = &s * &s_pow;
            lk_pow = &e.a1 * &lk_pow;
            v_pow = &v * &v_pow;
        }
        let mf = m as f64;
        let phi = (s_pow.trace().re / (df * df)).min(1.0);
        let ups = fro(&s_pow) / df;
        let inputs = DecayInputs {
            phi,
            phi_v: overlap_sq(&v_pow, &id),
            prod_phi_d: e.phi_d.powi(m as i32),
            phi_lk: overlap_sq(&lk_pow, &id),
            s_star: mf * (1.0 - e.w1),
            cross: mf * (1.0 - e.w1) * (1.0 - e.phi_d),
            s_prime: mf * (1.0 - e.x),
            sum_x_sq: mf * (1.0 - e.x).powi(2),
            prod_x: e.x.powi(m as i32),
            gamma_decoh: e.gamma_decoh,
            gamma_coh: gamma_coh_of(&v_pow)?,
        };
        let rep = thm8_eval(&inputs);
        let center = inputs.phi_v * inputs.prod_phi_d;
        let prod_upsilon = e.upsilon.powi(m as i32);
        let env = coherent_envelope(&vec![ratio; m], prod_upsilon, d)?;
        let ok = is_non_catastrophic(phi, ups) && inputs.phi_v > 0.5;
        rows.push(SweepRow {
            series: series.to_string(),
            m,
            phi,
            upsilon: ups,
            unitarity: unitarity(ups, d),
            prod_upsilon,
            thm8_center: center,
            thm8_halfwidth: rep.upper,
            thm8_lower: center - rep.upper,
            thm8_upper: center + rep.upper,
            decoherent_envelope: inputs.prod_phi_d,
            coherent_envelope_lower: env.lower,
            non_catastrophic: ok,
        });
        if !ok && catastrophic_at.is_none() {
            catastrophic_at = Some(m);
            if stop {
                break;
            }
        }
    }
    Ok(SweepResult { rows, catastrophic_at })
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    sweep_element(&cfg.series, &make_channel(&cfg.element)?, cfg.depth, true)
}

/// The three composition curves of the coherence-level figure: elements
/// with infidelity 1e-4 at coherence levels 10%, 1% and 0.01%, d = 2.
pub fn fig3_configs(depth: usize) -> Vec<SweepConfig> {
    [0.1, 0.01, 0.0001]
        .iter()
        .map(|&level| SweepConfig {
            series: format!("level={level}"),
            element: FamilySpec::new(Family::CoherenceMix, 2).with("r", 1e-4).with("level", level),
            depth,
            metrics: vec![],
        })
        .collect()
}

/// Interpretation recorded with every coherence-level sweep.
pub const FIG3_NOTE: &str =
    "elements read as infidelity 1 - Phi(A, I) = 1e-4 (a fidelity of 1e-4 would be catastrophic)";

pub fn sweep_csv(configs: &[SweepConfig], results: &[SweepResult]) -> String {
    let cols = configs.first().map(SweepConfig::columns).unwrap_or_else(|| KNOWN_METRICS.to_vec());
    let mut s = format!("series,m,{}\n", cols.join(","));
    for r in results.iter().flat_map(|r| &r.rows) {
        let vals: Vec<String> = cols.iter().map(|k| r.value(k)).collect();
        s.push_str(&format!("{},{},{}\n", csv_field(&r.series), r.m, vals.join(",")));
    }
    s
}

/// Singular values of a randomized extremal dephaser with its spread.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Dump {
    pub dim: usize,
    pub sigma: Vec<f64>,
    pub mean_defect: f64,
    pub sd_defect: f64,
    pub gamma_decoh: f64,
    pub gamma_decoh_sse: f64,
    pub sse_ok: bool,
    pub wse_ok: bool,
}

/// Bulk defects 1 − σ drawn from [0, FIG2_BULK], one outlier defect.
pub const FIG2_BULK: f64 = 2e-3;
pub const FIG2_OUTLIER: f64 = 0.06;
/// The spread is compared against 1/√E[1−σ] itself.
pub const FIG2_KAPPA: f64 = 1.0;

pub fn fig2_dump(d: usize, bulk: f64, outlier: f64, kappa: f64, seed: u64) -> Result<Fig2Dump> {
    let ch = extremal_dephaser_random(&mut trial_rng(seed, 0), d, bulk, outlier)?;
    let pol = channel_polar(&ch, false)?;
    let sigma = pol.a1_polar.singular_values.clone();
    let (big, small, mean_defect) = spectral_spread(&sigma);
    let rep = equability_constants(&sigma, &vec![1.0; d], kappa);
    Ok(Fig2Dump {
        dim: d,
        mean_defect,
        sd_defect: small * mean_defect,
        gamma_decoh: small,
        gamma_decoh_sse: big,
        sse_ok: rep.sse_ok,
        wse_ok: rep.wse_ok,
        sigma,
    })
}

pub fn fig2_csv(dump: &Fig2Dump) -> String {
    let mut s = String::from("row,index,sigma,defect,mean_defect,sd_defect,gamma_decoh,gamma_decoh_sse,sse_ok,wse_ok\n");
    for (i, x) in dump.sigma.iter().enumerate() {
        s.push_str(&format!("sv,{i},{},{},,,,,,\n", fmt_f64(*x), fmt_f64(1.0 - x)));
    }
    s.push_str(&format!(
        "summary,,,,{},{},{},{},{},{}\n",
        fmt_f64(dump.mean_defect),
        fmt_f64(dump.sd_defect),
        fmt_f64(dump.gamma_decoh),
        fmt_f64(dump.gamma_decoh_sse),
        dump.sse_ok,
        dump.wse_ok
    ));
    s
}
