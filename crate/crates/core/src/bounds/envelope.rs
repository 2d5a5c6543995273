use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};

/// Coherent envelope of Φ(A_{m:1}, U_{m:1}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub lower: f64,
    pub upper: f64,
    /// Some ratio exceeded 1 by rounding and was clipped.
    pub clipped: bool,
    /// Accumulated angle reached the point where the envelope is zero.
    pub saturated: bool,
}

/// Envelope from per-element ratios xᵢ = Φᵢ/Υᵢ, the product ΠΥᵢ and the
/// dimension; the parity of d selects the form.
pub fn coherent_envelope(ratios: &[f64], upsilon_product: f64, d: usize) -> Result<Envelope> {
    if d < 2 {
        return Err(Error::ParamOutOfRange("d >= 2 required".into()));
    }
    let mut clipped = false;
    let mut xs = Vec::with_capacity(ratios.len());
    for &x in ratios {
        if !(x > 0.5 && x <= 1.0 + 1e-9) {
            return Err(Error::RatioOutOfRange(x));
        }
        if x > 1.0 {
            clipped = true;
        }
        xs.push(x.min(1.0));
    }
    let df = d as f64;
    let (lower, saturated) = if d % 2 == 0 {
        let angle: f64 = xs.iter().map(|x| x.sqrt().acos()).sum();
        if angle >= FRAC_PI_2 {
            (0.0, true)
        } else {
            (angle.cos().powi(2) * upsilon_product, false)
        }
    } else {
        let mut angle = 0.0;
        for x in &xs {
            let arg = (df * x.sqrt() - 1.0) / (df - 1.0);
            if arg > 1.0 {
                clipped = true;
            }
            angle += arg.clamp(-1.0, 1.0).acos();
        }
        let amp = (df - 1.0) * angle.min(std::f64::consts::PI).cos() + 1.0;
        if amp <= 0.0 {
            (0.0, true)
        } else {
            ((amp / df).powi(2) * upsilon_product, false)
        }
    };
    Ok(Envelope { lower, upper: upsilon_product, clipped, saturated })
}
