use serde::Serialize;

use crate::channel::{compose, KrausChannel};
use crate::error::{Error, Result};
use crate::matcore::{hs_inner, identity, unitarity_defect, ComplexMatrix};
use crate::metrics::{is_non_catastrophic, phi, phi_unchecked, upsilon};
use crate::polar::{channel_polar, lk_is_psd, real_eigenparts, spectral_spread};

/// Ordered channels (index 0 applied first) with their unitary targets.
#[derive(Debug, Clone)]
pub struct CircuitSpec {
    pub channels: Vec<KrausChannel>,
    pub targets: Vec<ComplexMatrix>,
}

impl CircuitSpec {
    /// Targets default to identities.
    pub fn new(channels: Vec<KrausChannel>, targets: Option<Vec<ComplexMatrix>>) -> Result<Self> {
        let d = channels.first().ok_or_else(|| Error::DimensionMismatch("empty circuit".into()))?.dim;
        if channels.iter().any(|c| c.dim != d) {
            return Err(Error::DimensionMismatch("channels of different dimension".into()));
        }
        let targets = targets.unwrap_or_else(|| vec![identity(d); channels.len()]);
        if targets.len() != channels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} channels but {} targets",
                channels.len(),
                targets.len()
            )));
        }
        for t in &targets {
            if t.nrows() != d || t.ncols() != d {
                return Err(Error::DimensionMismatch("target dimension".into()));
            }
            let dev = unitarity_defect(t);
            if dev > 1e-9 {
                return Err(Error::TargetNotUnitary(dev));
            }
        }
        Ok(Self { channels, targets })
    }

    pub fn dim(&self) -> usize {
        self.channels[0].dim
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// U_m ⋯ U_1.
    pub fn target_product(&self) -> ComplexMatrix {
        self.targets.iter().fold(identity(self.dim()), |acc, u| u * acc)
    }
}

/// Scalars of one circuit element entering the theorem bounds.
#[derive(Debug, Clone, Serialize)]
pub struct ElementStats {
    /// Φ(A, U).
    pub phi: f64,
    pub upsilon: f64,
    /// w₁ = Υ(A*).
    pub w1: f64,
    /// √Φ(D*, I) = mean singular value of A₁.
    pub x: f64,
    /// Φ(D*, I) = x².
    pub phi_d_star: f64,
    /// Φ(D, I) with D = V†∘A.
    pub phi_d: f64,
    /// WSE decoherence constant γ.
    pub gamma_decoh: f64,
    /// LK operator A₁.
    #[serde(skip)]
    pub a1: ComplexMatrix,
    /// Polar unitary with A₁ = V|A₁|.
    #[serde(skip)]
    pub v: ComplexMatrix,
    pub decoherent: bool,
}

impl ElementStats {
    pub fn compute(ch: &KrausChannel, target: &ComplexMatrix) -> Result<Self> {
        let pol = channel_polar(ch, false)?;
        let can = &pol.canonical;
        let sigma = &pol.a1_polar.singular_values;
        let d = ch.dim as f64;
        let x = sigma.iter().sum::<f64>() / d;
        let (_, gamma_decoh, _) = spectral_spread(sigma);
        let v = pol.a1_polar.raw_unitary();
        Ok(Self {
            phi: phi(ch, target)?,
            upsilon: can.upsilon(),
            w1: can.weights[0],
            x,
            phi_d_star: x * x,
            phi_d: phi_unchecked(&pol.decoherent_left.kraus, &identity(ch.dim)).min(1.0),
            gamma_decoh,
            a1: can.leading().clone(),
            v,
            decoherent: lk_is_psd(can.leading(), 1e-9)?,
        })
    }

    pub fn non_catastrophic(&self) -> bool {
        is_non_catastrophic(self.phi, self.upsilon)
    }
}

/// Element scalars plus the composed quantities of a circuit.
#[derive(Debug, Clone)]
pub struct CircuitStats {
    pub dim: usize,
    pub elements: Vec<ElementStats>,
    pub composed: KrausChannel,
    pub target: ComplexMatrix,
    /// Φ(A_{m:1}, U_{m:1}).
    pub phi: f64,
    /// Υ(A_{m:1}).
    pub upsilon: f64,
    /// A₁^m ⋯ A₁^1.
    pub lk_product: ComplexMatrix,
    /// V_m ⋯ V_1.
    pub v_product: ComplexMatrix,
}

impl CircuitStats {
    pub fn compute(circuit: &CircuitSpec) -> Result<Self> {
        let d = circuit.dim();
        let elements = circuit
            .channels
            .iter()
            .zip(&circuit.targets)
            .map(|(c, u)| ElementStats::compute(c, u))
            .collect::<Result<Vec<_>>>()?;
        let composed = compose(&circuit.channels)?;
        let target = circuit.target_product();
        let mut lk_product = identity(d);
        let mut v_product = identity(d);
        for e in &elements {
            lk_product = &e.a1 * lk_product;
            v_product = &e.v * v_product;
        }
        Ok(Self {
            dim: d,
            phi: phi(&composed, &target)?,
            upsilon: upsilon(&composed),
            elements,
            composed,
            target,
            lk_product,
            v_product,
        })
    }

    pub fn ensure_non_catastrophic(&self) -> Result<()> {
        for (i, e) in self.elements.iter().enumerate() {
            if !e.non_catastrophic() {
                return Err(Error::NotNonCatastrophic(format!(
                    "element {i}: Phi = {}, Upsilon^2 = {}",
                    e.phi,
                    e.upsilon * e.upsilon
                )));
            }
        }
        if !is_non_catastrophic(self.phi, self.upsilon) {
            return Err(Error::NotNonCatastrophic(format!(
                "composition: Phi = {}, Upsilon^2 = {}",
                self.phi,
                self.upsilon * self.upsilon
            )));
        }
        Ok(())
    }

    pub fn ensure_decoherent(&self) -> Result<()> {
        match self.elements.iter().position(|e| !e.decoherent) {
            Some(i) => Err(Error::NotDecoherent(format!("element {i}"))),
            None => Ok(()),
        }
    }

    /// Υ(A*_{m:1}) = ‖A₁^m ⋯ A₁^1‖²/d.
    pub fn upsilon_lk_composed(&self) -> f64 {
        crate::matcore::fro_sqr(&self.lk_product) / self.dim as f64
    }

    /// |tr(W† A₁^m ⋯ A₁^1)|²/d².
    pub fn phi_lk_composed(&self, w: &ComplexMatrix) -> f64 {
        let d = self.dim as f64;
        hs_inner(w, &self.lk_product).norm_sqr() / (d * d)
    }

    pub fn s_star(&self) -> f64 {
        self.elements.iter().map(|e| 1.0 - e.w1).sum()
    }

    pub fn s_prime(&self) -> f64 {
        self.elements.iter().map(|e| 1.0 - e.x).sum()
    }

    pub fn gamma_decoh(&self) -> f64 {
        self.elements.iter().map(|e| e.gamma_decoh).fold(0.0, f64::max)
    }
}

/// WSE coherence constant of a unitary, with its trace phase removed
/// whenever that phase is defined.
pub fn gamma_coh_of(v: &ComplexMatrix) -> Result<f64> {
    let t = v.trace();
    let v = if t.norm() > 1e-9 { v * (t.conj() / t.norm()) } else { v.clone() };
    let lambda = real_eigenparts(&v)?;
    Ok(spectral_spread(&lambda).1)
}
