use serde::Serialize;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::matcore::{c, expm_hermitian, fro, hs_inner, identity, ComplexMatrix, C64};
use crate::polar::channel_polar;

/// Largest dimension accepted by the optimizer.
pub const MAX_DIM: usize = 8;
const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeResult {
    #[serde(skip)]
    pub w: ComplexMatrix,
    /// Best Φ(W∘A, U) found.
    pub phi: f64,
    /// Φ at the starting point W₀ = U V†.
    pub phi_start: f64,
    /// Φ evaluations plus gradient evaluations.
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

struct Objective<'a> {
    kraus: &'a [ComplexMatrix],
    u: &'a ComplexMatrix,
    d2: f64,
    evals: usize,
}

impl Objective<'_> {
    fn traces(&self, w: &ComplexMatrix) -> Vec<C64> {
        let uw = self.u.adjoint() * w;
        self.kraus.iter().map(|a| hs_inner(&uw.adjoint(), a)).collect()
    }

    fn value(&mut self, w: &ComplexMatrix) -> f64 {
        self.evals += 1;
        self.traces(w).iter().map(|t| t.norm_sqr()).sum::<f64>() / self.d2
    }

    /// Hermitian traceless H such that Φ(exp(−iηH)W∘A) grows fastest at η = 0.
    fn ascent(&mut self, w: &ComplexMatrix) -> ComplexMatrix {
        self.evals += 1;
        let d = w.nrows();
        let ts = self.traces(w);
        let mut y = ComplexMatrix::zeros(d, d);
        for (a, t) in self.kraus.iter().zip(&ts) {
            y += (w * a * self.u.adjoint()) * t.conj();
        }
        let z = y * c(0.0, -1.0);
        let mut h = (&z + z.adjoint()) * c(0.5, 0.0);
        let tr = h.trace() / c(d as f64, 0.0);
        h -= identity(d) * tr;
        h
    }
}

/// Gradient ascent of Φ(W∘A, U) over unitaries W, started at the polar
/// correction W₀ = U∘V†. Deterministic; a larger budget never gives a
/// smaller result.
pub fn optimize_unitary_correction(ch: &KrausChannel, target: &ComplexMatrix, budget: usize) -> Result<OptimizeResult> {
    let d = ch.dim;
    if d > MAX_DIM {
        return Err(Error::ParamOutOfRange(format!("optimizer limited to d <= {MAX_DIM}")));
    }
    if target.nrows() != d {
        return Err(Error::DimensionMismatch("target dimension".into()));
    }
    let pol = channel_polar(ch, false)?;
    let mut w = target * pol.v.adjoint();
    let mut obj = Objective { kraus: &ch.kraus, u: target, d2: (d * d) as f64, evals: 0 };
    let mut best = obj.value(&w);
    let phi_start = best;
    let mut step = 0.5;
    let mut exhausted = false;
    'outer: loop {
        if obj.evals + 2 > budget {
            exhausted = true;
            break;
        }
        let h = obj.ascent(&w);
        let g = fro(&h);
        if g < 1e-13 {
            break;
        }
        let dir = h / c(g, 0.0);
        loop {
            if obj.evals >= budget {
                exhausted = true;
                break 'outer;
            }
            let cand = expm_hermitian(&dir, step)? * &w;
            let val = obj.value(&cand);
            if val > best {
                best = val;
                w = cand;
                step *= 2.0;
                break;
            }
            step *= 0.5;
            if step < MIN_STEP {
                break 'outer;
            }
        }
    }
    Ok(OptimizeResult { w, phi: best, phi_start, evaluations: obj.evals, budget_exhausted: exhausted })
}
