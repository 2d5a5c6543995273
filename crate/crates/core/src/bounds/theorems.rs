//! Theorem envelopes. Each theorem has a plain-scalar input struct and an
//! evaluator, so that long sweeps can feed incrementally updated scalars;
//! the circuit-level wrappers compute those scalars from channels.

use serde::Serialize;

use super::circuit::{gamma_coh_of, CircuitSpec, CircuitStats};
use super::optimize::{optimize_unitary_correction, OptimizeResult};
use super::report::BoundReport;
use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::matcore::{hs_inner, identity, unitarity_defect, ComplexMatrix};
use crate::metrics::{is_non_catastrophic, overlap_sq, phi, phi_unchecked};

fn t(name: &str, v: f64) -> (String, f64) {
    (name.to_string(), v)
}

fn sq(x: f64) -> f64 {
    x * x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm1Inputs {
    /// Υ(A_{m:1}).
    pub upsilon: f64,
    /// Υ(A*_{m:1}).
    pub upsilon_lk: f64,
}

pub fn thm1_eval(x: &Thm1Inputs) -> BoundReport {
    BoundReport::new(
        "thm1",
        sq(x.upsilon) - sq(x.upsilon_lk),
        0.0,
        vec![t("(1-Y(A*))^2", sq(1.0 - x.upsilon_lk))],
        false,
    )
    .with_alternate("(1-Y^2)^2", sq(1.0 - sq(x.upsilon)), true)
}

pub fn thm1_uni_evo(circuit: &CircuitSpec) -> Result<BoundReport> {
    let s = CircuitStats::compute(circuit)?;
    s.ensure_non_catastrophic()?;
    Ok(thm1_eval(&Thm1Inputs { upsilon: s.upsilon, upsilon_lk: s.upsilon_lk_composed() }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm2Inputs {
    /// Φ(A_{m:1}, U_{m:1}).
    pub phi: f64,
    /// Φ(A*_{m:1}, U_{m:1}).
    pub phi_lk: f64,
    /// Σ(1 − Υ(A_i*)).
    pub s_star: f64,
    /// Σ(1 − Υ²(A_i)).
    pub s_sq: f64,
}

/// Upper bound in the form free of LK quantities except Φ*, with the
/// LK form reported as an alternate.
pub fn thm2_eval(x: &Thm2Inputs) -> BoundReport {
    let s = x.s_sq;
    BoundReport::new(
        "thm2",
        x.phi - x.phi_lk,
        0.0,
        vec![
            t("X^2/2", 0.5 * s * s),
            t("(1-Phi)X", (1.0 - x.phi) * s),
            t("X^3/2", 0.5 * s * s * s),
            t("(1-Phi*)X^2", (1.0 - x.phi_lk) * s * s),
        ],
        false,
    )
    .with_alternate("star_form", 0.5 * sq(x.s_star) + (1.0 - x.phi_lk) * x.s_star, true)
}

pub fn thm2_fid_evo(circuit: &CircuitSpec) -> Result<BoundReport> {
    let s = CircuitStats::compute(circuit)?;
    s.ensure_non_catastrophic()?;
    Ok(thm2_eval(&Thm2Inputs {
        phi: s.phi,
        phi_lk: s.phi_lk_composed(&s.target),
        s_star: s.s_star(),
        s_sq: s.elements.iter().map(|e| 1.0 - sq(e.upsilon)).sum(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm4Inputs {
    /// Φ(V∘D_{m:1}, I).
    pub phi: f64,
    /// Φ(V∘D*_{m:1}, I).
    pub phi_lk: f64,
    /// Φ(V, I).
    pub phi_v: f64,
    pub min_phi_d: f64,
    /// Σ(1 − Υ(D_i*)).
    pub s_star: f64,
    /// Σ(1 − Φ(D_i, I)).
    pub sum_r_d: f64,
    /// Σ(1 − Φ(D_i*, I))².
    pub sum_r_d_star_sq: f64,
    /// Σ(1 − Φ(D_i, I))(1 − Υ²(D_i)).
    pub cross: f64,
}

/// (quasi-monotonicity, quasi-subadditivity).
pub fn thm4_eval(x: &Thm4Inputs) -> (BoundReport, BoundReport) {
    let mono = BoundReport::new(
        "thm4_monotonicity",
        x.phi,
        0.0,
        vec![
            t("min Phi(D_i)", x.min_phi_d),
            t("S*^2/2", 0.5 * sq(x.s_star)),
            t("(1-Phi(VD*))S*", (1.0 - x.phi_lk) * x.s_star),
        ],
        false,
    );
    let sub = BoundReport::new(
        "thm4_subadditivity",
        1.0 - x.phi,
        0.0,
        vec![
            t("1-Phi(V)", 1.0 - x.phi_v),
            t("sum 1-Phi(D_i)", x.sum_r_d),
            t("(1-Phi(V))^2", sq(1.0 - x.phi_v)),
            t("sum (1-Phi(D_i*))^2", x.sum_r_d_star_sq),
            t("sum (1-Phi(D_i))(1-Y^2(D_i))", x.cross),
        ],
        false,
    );
    (mono, sub)
}

fn check_unitary(v: &ComplexMatrix, d: usize) -> Result<()> {
    if v.nrows() != d || v.ncols() != d {
        return Err(Error::DimensionMismatch("unitary dimension".into()));
    }
    let dev = unitarity_defect(v);
    if dev > 1e-9 {
        return Err(Error::TargetNotUnitary(dev));
    }
    Ok(())
}

/// Decoherent circuit followed by a unitary V; scalars shared by Thms 4, 6, 8.
fn decoherent_stats(circuit: &CircuitSpec, v: &ComplexMatrix) -> Result<(CircuitStats, f64, f64)> {
    let d = circuit.dim();
    check_unitary(v, d)?;
    let s = CircuitStats::compute(circuit)?;
    s.ensure_decoherent()?;
    let full = crate::channel::left_multiply(v, &s.composed);
    let phi_full = phi_unchecked(&full.kraus, &identity(d)).min(1.0);
    let phi_lk = hs_inner(&v.adjoint(), &s.lk_product).norm_sqr() / sq(d as f64);
    Ok((s, phi_full, phi_lk))
}

pub fn thm4_decoherent_features(circuit: &CircuitSpec, v: &ComplexMatrix) -> Result<(BoundReport, BoundReport)> {
    let (s, phi_full, phi_lk) = decoherent_stats(circuit, v)?;
    let e = &s.elements;
    Ok(thm4_eval(&Thm4Inputs {
        phi: phi_full,
        phi_lk,
        phi_v: overlap_sq(v, &identity(s.dim)),
        min_phi_d: e.iter().map(|e| e.phi).fold(f64::INFINITY, f64::min),
        s_star: s.s_star(),
        sum_r_d: e.iter().map(|e| 1.0 - e.phi).sum(),
        sum_r_d_star_sq: e.iter().map(|e| sq(1.0 - e.phi_d_star)).sum(),
        cross: e.iter().map(|e| (1.0 - e.phi) * (1.0 - sq(e.upsilon))).sum(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm5Inputs {
    /// Υ(A_{m:1}).
    pub upsilon: f64,
    /// Π Υ(A_i).
    pub prod_upsilon: f64,
    pub min_upsilon: f64,
    /// Υ(A*_{m:1}).
    pub upsilon_lk: f64,
    /// Σ(1 − w₁ᵢ)².
    pub sum_w1_sq: f64,
    /// Σ(1 − xᵢ)² with xᵢ = √Φ(D_i*, I).
    pub sum_x_sq: f64,
    /// Σ(1 − xᵢ).
    pub s_prime: f64,
    /// Σ[(1 − Υᵢ) + (1 − Υᵢ²)²].
    pub subadditive: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm5Report {
    pub multiplicative: BoundReport,
    pub monotonicity: BoundReport,
    pub subadditivity: BoundReport,
}

impl Thm5Report {
    pub fn all_hold(&self) -> bool {
        self.multiplicative.all_hold() && self.monotonicity.all_hold() && self.subadditivity.all_hold()
    }
}

pub fn thm5_eval(x: &Thm5Inputs) -> Thm5Report {
    let g2 = sq(x.gamma);
    let multiplicative = BoundReport::new(
        "thm5",
        (x.upsilon - x.prod_upsilon).abs(),
        0.0,
        vec![
            t("(1-Y(A*))^2", sq(1.0 - x.upsilon_lk)),
            t("sum (1-w1)^2", x.sum_w1_sq),
            t("g^2 sum (1-x)^2", g2 * x.sum_x_sq),
            t("2g^2 S'^2", 2.0 * g2 * sq(x.s_prime)),
        ],
        true,
    );
    let monotonicity = BoundReport::new(
        "thm5_monotonicity",
        x.upsilon,
        0.0,
        vec![
            t("min Y_i", x.min_upsilon),
            t("(1-Y(A*))^2/sqrt2", sq(1.0 - x.upsilon_lk) / std::f64::consts::SQRT_2),
        ],
        false,
    )
    .with_alternate(
        "min Y_i + (1-Y^2)^2/sqrt2",
        x.min_upsilon + sq(1.0 - sq(x.upsilon)) / std::f64::consts::SQRT_2,
        true,
    );
    let subadditivity = BoundReport::new(
        "thm5_subadditivity",
        1.0 - x.upsilon,
        0.0,
        vec![t("sum (1-Y_i)+(1-Y_i^2)^2", x.subadditive)],
        false,
    );
    Thm5Report { multiplicative, monotonicity, subadditivity }
}

/// γ = max over elements, or the supplied cap when it dominates them.
fn resolve_gamma(measured: f64, cap: Option<f64>) -> Result<f64> {
    match cap {
        Some(c) if c < measured - 1e-12 => Err(Error::ParamOutOfRange(format!(
            "gamma cap {c} below element constant {measured}"
        ))),
        Some(c) => Ok(c),
        None => Ok(measured),
    }
}

pub fn thm5_unitarity_decay(circuit: &CircuitSpec, gamma_decoh_cap: Option<f64>) -> Result<Thm5Report> {
    let s = CircuitStats::compute(circuit)?;
    s.ensure_non_catastrophic()?;
    let e = &s.elements;
    Ok(thm5_eval(&Thm5Inputs {
        upsilon: s.upsilon,
        prod_upsilon: e.iter().map(|e| e.upsilon).product(),
        min_upsilon: e.iter().map(|e| e.upsilon).fold(f64::INFINITY, f64::min),
        upsilon_lk: s.upsilon_lk_composed(),
        sum_w1_sq: e.iter().map(|e| sq(1.0 - e.w1)).sum(),
        sum_x_sq: e.iter().map(|e| sq(1.0 - e.x)).sum(),
        s_prime: s.s_prime(),
        subadditive: e.iter().map(|e| (1.0 - e.upsilon) + sq(1.0 - sq(e.upsilon))).sum(),
        gamma: resolve_gamma(s.gamma_decoh(), gamma_decoh_cap)?,
    }))
}

/// Scalars shared by the decoherent decay laws (Thms 6 and 8).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayInputs {
    /// Φ(V∘D_{m:1}, I); V = I for Thm 6.
    pub phi: f64,
    /// Φ(V, I).
    pub phi_v: f64,
    /// Π Φ(D_i, I).
    pub prod_phi_d: f64,
    /// Φ(V∘D*_{m:1}, I).
    pub phi_lk: f64,
    /// Σ(1 − Υ(D_i*)).
    pub s_star: f64,
    /// Σ(1 − Υ(D_i*))(1 − Φ(D_i, I)).
    pub cross: f64,
    /// Σ(1 − xᵢ), xᵢ = √Φ(D_i*, I).
    pub s_prime: f64,
    /// Σ(1 − xᵢ)².
    pub sum_x_sq: f64,
    /// Π xᵢ.
    pub prod_x: f64,
    pub gamma_decoh: f64,
    pub gamma_coh: f64,
}

impl DecayInputs {
    fn center(&self) -> f64 {
        self.phi_v * self.prod_phi_d
    }

    fn common_terms(&self) -> Vec<(String, f64)> {
        vec![
            t("S*^2/2", 0.5 * sq(self.s_star)),
            t("(1-Phi(VD*))S*", (1.0 - self.phi_lk) * self.s_star),
            t("sum (1-w1)(1-Phi(D_i))", self.cross),
        ]
    }

    /// γ²Πx·S'² + γ⁴S'⁴/4.
    fn product_terms(&self) -> (f64, f64) {
        let g2 = sq(self.gamma_decoh);
        let s2 = sq(self.s_prime);
        (g2 * self.prod_x * s2, sq(g2) / 4.0 * sq(s2))
    }
}

pub fn thm6_eval(x: &DecayInputs) -> BoundReport {
    let mut terms = x.common_terms();
    let (a, b) = x.product_terms();
    terms.push(t("g^2 prod x S'^2", a));
    terms.push(t("hot: g^4 S'^4/4", b));
    BoundReport::new("thm6", (x.phi - x.center()).abs(), 0.0, terms, true)
}

pub fn thm8_eval(x: &DecayInputs) -> BoundReport {
    let mut terms = x.common_terms();
    let g2 = sq(x.gamma_decoh);
    let s2 = sq(x.s_prime);
    terms.push(t("2 gd gc (1-sqrt Phi(V)) S'", 2.0 * x.gamma_decoh * x.gamma_coh * (1.0 - x.phi_v.sqrt()) * x.s_prime));
    terms.push(t("gd^2 S'^2", g2 * s2));
    // The imaginary part of tr(V Π|D|) enters with weight 1 − Φ(V).
    let (a, b) = x.product_terms();
    let imag = (1.0 - x.phi_v) * (a + b + g2 * x.sum_x_sq + 2.0 * g2 * s2);
    terms.push(t("hot: (1-Phi(V)) imaginary part", imag));
    BoundReport::new("thm8", (x.phi - x.center()).abs(), 0.0, terms, true)
}

fn decay_inputs(s: &CircuitStats, phi_full: f64, phi_v: f64, phi_lk: f64, gamma_coh: f64) -> DecayInputs {
    let e = &s.elements;
    DecayInputs {
        phi: phi_full,
        phi_v,
        prod_phi_d: e.iter().map(|e| e.phi_d).product(),
        phi_lk,
        s_star: s.s_star(),
        cross: e.iter().map(|e| (1.0 - e.w1) * (1.0 - e.phi_d)).sum(),
        s_prime: s.s_prime(),
        sum_x_sq: e.iter().map(|e| sq(1.0 - e.x)).sum(),
        prod_x: e.iter().map(|e| e.x).product(),
        gamma_decoh: s.gamma_decoh(),
        gamma_coh,
    }
}

fn ensure_decoherent_domain(s: &CircuitStats, phi_full: f64, upsilon: f64) -> Result<()> {
    for (i, e) in s.elements.iter().enumerate() {
        if !is_non_catastrophic(e.phi_d, e.upsilon) {
            return Err(Error::NotNonCatastrophic(format!("element {i}")));
        }
    }
    if !is_non_catastrophic(phi_full, upsilon) {
        return Err(Error::NotNonCatastrophic(format!("composition: Phi = {phi_full}")));
    }
    Ok(())
}

pub fn thm6_fidelity_decay(circuit: &CircuitSpec) -> Result<BoundReport> {
    let d = circuit.dim();
    let (s, phi_full, phi_lk) = decoherent_stats(circuit, &identity(d))?;
    ensure_decoherent_domain(&s, phi_full, s.upsilon)?;
    Ok(thm6_eval(&decay_inputs(&s, phi_full, 1.0, phi_lk, 0.0)))
}

pub fn thm8_equable_composition(v: &ComplexMatrix, circuit: &CircuitSpec) -> Result<BoundReport> {
    let d = circuit.dim();
    let (s, phi_full, phi_lk) = decoherent_stats(circuit, v)?;
    ensure_decoherent_domain(&s, phi_full, s.upsilon)?;
    let phi_v = overlap_sq(v, &identity(d));
    if phi_v <= 0.5 {
        return Err(Error::NotNonCatastrophic(format!("Phi(V) = {phi_v}")));
    }
    Ok(thm8_eval(&decay_inputs(&s, phi_full, phi_v, phi_lk, gamma_coh_of(v)?)))
}

/// Thm 8 applied to a general circuit through A_{m:1} = V_{m:1}∘D′_{m:1},
/// V_{m:1} the product of the element polar unitaries and D′ᵢ the
/// conjugated decoherent factors, against the target U_{m:1}.
pub fn thm8_circuit(circuit: &CircuitSpec) -> Result<BoundReport> {
    let s = CircuitStats::compute(circuit)?;
    s.ensure_non_catastrophic()?;
    let coherent = s.target.adjoint() * &s.v_product;
    let id = identity(s.dim);
    let phi_v = overlap_sq(&coherent, &id);
    Ok(thm8_eval(&decay_inputs(
        &s,
        s.phi,
        phi_v,
        s.phi_lk_composed(&s.target),
        gamma_coh_of(&coherent)?,
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm7Inputs {
    /// Φ(W₀∘A, U).
    pub phi_corrected: f64,
    pub upsilon: f64,
    pub gamma: f64,
}

pub fn thm7_eval(x: &Thm7Inputs) -> BoundReport {
    let u2 = sq(x.upsilon);
    let defect = sq(1.0 - u2);
    BoundReport::from_parts(
        "thm7",
        x.phi_corrected,
        u2 - defect,
        x.upsilon + 1.5 * defect,
        vec![t("Y", x.upsilon), t("1.5(1-Y^2)^2", 1.5 * defect), t("lower: (1-Y^2)^2", defect)],
        false,
    )
    .with_alternate("Y-(1+g^2)(1-Y^2)^2", x.upsilon - (1.0 + sq(x.gamma)) * defect, false)
}

/// Thm 7 envelope plus the numerical optimizer run from W₀.
#[derive(Debug, Clone, Serialize)]
pub struct Thm7Report {
    pub report: BoundReport,
    pub optimizer: Option<OptimizeResult>,
    /// Φ found by the optimizer minus Φ(W₀∘A, U).
    pub improvement: f64,
    /// Optimized Φ stays below the upper envelope.
    pub optimizer_within_upper: bool,
}

impl Thm7Report {
    pub fn all_hold(&self) -> bool {
        self.report.all_hold() && self.optimizer_within_upper
    }
}

/// Thm 7 with W₀ = U∘V†; `budget` = 0 skips the optimizer.
pub fn thm7_max_correction(ch: &KrausChannel, target: &ComplexMatrix, budget: usize) -> Result<Thm7Report> {
    let pol = crate::polar::channel_polar(ch, false)?;
    let can = &pol.canonical;
    let up = can.upsilon();
    let ph = phi(ch, target)?;
    if !is_non_catastrophic(ph, up) {
        return Err(Error::NotNonCatastrophic(format!("Phi = {ph}, Upsilon^2 = {}", up * up)));
    }
    let w0 = target * pol.v.adjoint();
    let corrected = crate::channel::left_multiply(&w0, ch);
    let phi_corrected = phi(&corrected, target)?;
    let (_, gamma, _) = crate::polar::spectral_spread(&pol.a1_polar.singular_values);
    let report = thm7_eval(&Thm7Inputs { phi_corrected, upsilon: up, gamma });
    let (optimizer, improvement) = if budget > 0 && ch.dim <= super::optimize::MAX_DIM {
        let r = optimize_unitary_correction(ch, target, budget)?;
        let imp = r.phi - phi_corrected;
        (Some(r), imp)
    } else {
        (None, 0.0)
    };
    let best = phi_corrected + improvement.max(0.0);
    Ok(Thm7Report {
        optimizer_within_upper: best <= report.upper + super::report::HOLD_TOL,
        report,
        optimizer,
        improvement,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm9Inputs {
    /// Φ(W₀∘A_{m:1}, U_{m:1}).
    pub phi_corrected: f64,
    pub prod_upsilon: f64,
    pub s_star: f64,
    /// Σ(1 − w₁ᵢ)².
    pub sum_w1_sq: f64,
    pub s_prime: f64,
    pub sum_x_sq: f64,
    pub prod_x: f64,
    pub gamma: f64,
}

pub fn thm9_eval(x: &Thm9Inputs) -> BoundReport {
    let g2 = sq(x.gamma);
    let s2 = sq(x.s_prime);
    let up = vec![
        t("prod Y", x.prod_upsilon),
        t("S*^2/2", 0.5 * sq(x.s_star)),
        t("sum (1-w1)^2", x.sum_w1_sq),
        t("S*(1-prod Y)", x.s_star * (1.0 - x.prod_upsilon)),
        t("2g^2 S'^2", 2.0 * g2 * s2),
    ];
    let upper: f64 = up.iter().map(|t| t.1).sum();
    let low = [
        g2 * x.sum_x_sq,
        x.sum_w1_sq,
        g2 * x.prod_x * s2,
        sq(g2) / 4.0 * sq(s2),
    ];
    let lower = x.prod_upsilon - low.iter().sum::<f64>();
    let mut terms = up;
    terms.push(t("lower: g^2 sum (1-x)^2", low[0]));
    terms.push(t("lower: sum (1-w1)^2", low[1]));
    terms.push(t("lower: g^2 prod x S'^2", low[2]));
    terms.push(t("lower hot: g^4 S'^4/4", low[3]));
    BoundReport::from_parts("thm9", x.phi_corrected, lower, upper, terms, true)
}

pub fn thm9_max_correction_multi(circuit: &CircuitSpec) -> Result<BoundReport> {
    let s = CircuitStats::compute(circuit)?;
    s.ensure_non_catastrophic()?;
    let w0 = &s.target * s.v_product.adjoint();
    let corrected = crate::channel::left_multiply(&w0, &s.composed);
    let e = &s.elements;
    Ok(thm9_eval(&Thm9Inputs {
        phi_corrected: phi(&corrected, &s.target)?,
        prod_upsilon: e.iter().map(|e| e.upsilon).product(),
        s_star: s.s_star(),
        sum_w1_sq: e.iter().map(|e| sq(1.0 - e.w1)).sum(),
        s_prime: s.s_prime(),
        sum_x_sq: e.iter().map(|e| sq(1.0 - e.x)).sum(),
        prod_x: e.iter().map(|e| e.x).product(),
        gamma: s.gamma_decoh(),
    }))
}
