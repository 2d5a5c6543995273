//! Seeded generators for every channel family used in tests, sweeps and
//! figure reproductions.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::matcore::{
    c, diag_real, expm_hermitian, identity, ket_bra, svd, zeros, ComplexMatrix, C64, ONE,
};
use crate::metrics::infidelity;
use crate::polar::channel_polar;

/// Generator for trial `index` of a run seeded with `seed`; independent of
/// evaluation order.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard complex normal, E|z|² = 1.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    // Filled column by column for a fixed draw order.
    let mut m = ComplexMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// Haar-random pure state as a d×1 column.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let v = ginibre(rng, d, 1);
    let n = crate::matcore::fro(&v);
    v / c(n, 0.0)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix with
/// the phases of diag(R) moved into Q.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    haar_isometry(rng, d, d)
}

/// Haar-random isometry (rows ≥ cols), the thin Q factor of a Ginibre matrix.
pub fn haar_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let g = ginibre(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { ONE };
        for i in 0..rows {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    haar_unitary(&mut trial_rng(seed, 0), d)
}

/// Hermitian matrix (G + G†)/2 with G Ginibre.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Random density matrix W W†/tr.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d);
    let m = &g * g.adjoint();
    let t = m.trace();
    m / t
}

/// Gaussian matrix with singular values above 1 clipped to 1.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d) * c(1.2 / (d as f64).sqrt(), 0.0);
    let s = svd(&g).expect("finite input");
    let mut out = zeros(d);
    for k in 0..d {
        out += (s.w.column(k) * s.y.column(k).adjoint()) * c(s.sigma[k].min(1.0), 0.0);
    }
    out
}

/// Weyl operator X^a Z^b with X|j⟩ = |j+1⟩ and Z|j⟩ = ω^j|j⟩.
pub fn weyl(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut m = zeros(d);
    for j in 0..d {
        let phase = C64::from_polar(1.0, 2.0 * PI * ((b * j) % d) as f64 / d as f64);
        m[((j + a) % d, j)] = phase;
    }
    m
}

/// Rotation [[cos θ, −sin θ], [sin θ, cos θ]].
pub fn rotation2(theta: f64) -> ComplexMatrix {
    crate::matcore::from_real_rows(2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

/// Rotation embedded in dimension d: R ⊗ I_{d/2} when `tensor`, otherwise
/// R ⊕ I_{d−2}.
pub fn rotation(d: usize, theta: f64, tensor: bool) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::ParamOutOfRange("rotation needs d >= 2".into()));
    }
    let r = rotation2(theta);
    if tensor {
        if d % 2 != 0 {
            return Err(Error::ParamOutOfRange("tensor embedding needs even d".into()));
        }
        return Ok(r.kronecker(&identity(d / 2)));
    }
    let mut m = identity(d);
    m.view_mut((0, 0), (2, 2)).copy_from(&r);
    Ok(m)
}

/// Stinespring construction: Kraus blocks of the first d columns of a
/// (d·k)-dimensional unitary.
fn kraus_from_unitary(w: &ComplexMatrix, d: usize, k: usize) -> KrausChannel {
    let kraus = (0..k).map(|j| w.view((j * d, 0), (d, d)).into_owned()).collect();
    KrausChannel { dim: d, kraus }
}

fn check_rank(d: usize, rank: usize) -> Result<()> {
    if rank == 0 || rank > d * d {
        return Err(Error::ParamOutOfRange(format!("kraus_rank {rank} outside [1, {}]", d * d)));
    }
    Ok(())
}

/// Random channel whose Kraus operators are carved from a Haar isometry.
pub fn random_cptp_rng<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> Result<KrausChannel> {
    check_rank(d, rank)?;
    Ok(kraus_from_unitary(&haar_isometry(rng, d * rank, d), d, rank))
}

pub fn random_cptp(d: usize, rank: usize, seed: u64) -> Result<KrausChannel> {
    random_cptp_rng(&mut trial_rng(seed, 0), d, rank)
}

/// Channel from the isometry exp(−iεH) restricted to the environment
/// ground state, H a Hermitian Gaussian scaled to unit spectral size.
pub fn near_identity_cptp_rng<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize, eps: f64) -> Result<KrausChannel> {
    check_rank(d, rank)?;
    let n = d * rank;
    let h = random_hermitian(rng, n) * c(1.0 / (n as f64).sqrt(), 0.0);
    let w = expm_hermitian(&h, eps)?;
    Ok(kraus_from_unitary(&w, d, rank))
}

/// Unitary error exp(−iεH) with ‖H‖ = √d.
pub fn random_unitary_error_rng<R: Rng + ?Sized>(rng: &mut R, d: usize, eps: f64) -> Result<ComplexMatrix> {
    let h = random_hermitian(rng, d);
    let n = crate::matcore::fro(&h);
    let h = h * c((d as f64).sqrt() / n, 0.0);
    expm_hermitian(&h, eps)
}

/// Decoherent factor V†∘A of a random channel near the identity.
pub fn psd_lk_decoherent_rng<R: Rng + ?Sized>(rng: &mut R, d: usize, strength: f64) -> Result<KrausChannel> {
    if !(strength > 0.0 && strength <= 0.3) {
        return Err(Error::ParamOutOfRange(format!("strength {strength} outside (0, 0.3]")));
    }
    let a = near_identity_cptp_rng(rng, d, d * d, strength)?;
    Ok(channel_polar(&a, false)?.decoherent_left)
}

pub fn psd_lk_decoherent(d: usize, strength: f64, seed: u64) -> Result<KrausChannel> {
    psd_lk_decoherent_rng(&mut trial_rng(seed, 0), d, strength)
}

/// Named channel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Identity,
    Depolarizing,
    Dephasing,
    StochasticWeyl,
    AmplitudeDamping,
    Rotation,
    RandomUnitaryError,
    RandomCptp,
    PsdLkDecoherent,
    ExtremalDephaser,
    ExtremalUnitary,
    Spiral,
    CoherenceMix,
}

/// A family name, a dimension and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub dim: usize,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FamilySpec {
    pub fn new(family: Family, dim: usize) -> Self {
        Self { family, dim, params: BTreeMap::new(), seed: None }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn get(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::ParamOutOfRange(format!("missing parameter '{key}'")))
    }

    fn get_or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::ParamOutOfRange("random family needs a seed".into()))
    }
}

fn in_range(name: &str, x: f64, lo: f64, hi: f64) -> Result<f64> {
    if x.is_finite() && x >= lo && x <= hi {
        Ok(x)
    } else {
        Err(Error::ParamOutOfRange(format!("{name} = {x} outside [{lo}, {hi}]")))
    }
}

fn scaled(m: ComplexMatrix, s: f64) -> ComplexMatrix {
    m * c(s, 0.0)
}

/// Stochastic Weyl channel ρ ↦ Σ p_ab W_ab ρ W_ab†.
pub fn stochastic_weyl(d: usize, probs: &BTreeMap<(usize, usize), f64>) -> Result<KrausChannel> {
    let total: f64 = probs.values().sum();
    if (total - 1.0).abs() > 1e-12 || probs.values().any(|&p| p < 0.0) {
        return Err(Error::ParamOutOfRange(format!("Weyl probabilities sum to {total}")));
    }
    let kraus = probs
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(&(a, b), &p)| scaled(weyl(d, a, b), p.sqrt()))
        .collect();
    KrausChannel::new(kraus)
}

/// ρ ↦ pρ + (1−p) tr(ρ) I/d in Weyl form.
pub fn depolarizing(d: usize, p: f64) -> Result<KrausChannel> {
    in_range("p", p, 0.0, 1.0)?;
    let d2 = (d * d) as f64;
    let mut probs = BTreeMap::new();
    for a in 0..d {
        for b in 0..d {
            let w = if a == 0 && b == 0 { p + (1.0 - p) / d2 } else { (1.0 - p) / d2 };
            probs.insert((a, b), w);
        }
    }
    let total: f64 = probs.values().sum();
    probs.values_mut().for_each(|w| *w /= total);
    stochastic_weyl(d, &probs)
}

/// (1−q)ρ + q ZρZ for d = 2; (1−q)ρ + q/(d−1) Σ_{b≥1} Z^b ρ Z^{−b} otherwise.
pub fn dephasing(d: usize, q: f64) -> Result<KrausChannel> {
    in_range("q", q, 0.0, 0.5)?;
    let mut kraus = vec![scaled(identity(d), (1.0 - q).sqrt())];
    if q > 0.0 {
        let each = q / (d - 1) as f64;
        kraus.extend((1..d).map(|b| scaled(weyl(d, 0, b), each.sqrt())));
    }
    KrausChannel::new(kraus)
}

/// Decay of every excited level to |0⟩ with probability γ.
pub fn amplitude_damping(d: usize, gamma: f64) -> Result<KrausChannel> {
    in_range("gamma", gamma, 0.0, 1.0)?;
    let mut k0 = zeros(d);
    k0[(0, 0)] = ONE;
    for i in 1..d {
        k0[(i, i)] = c((1.0 - gamma).sqrt(), 0.0);
    }
    let mut kraus = vec![k0];
    if gamma > 0.0 {
        kraus.extend((1..d).map(|j| scaled(ket_bra(d, 0, j), gamma.sqrt())));
    }
    KrausChannel::new(kraus)
}

/// Extremal dephaser: the projector onto the last d−k basis states and the
/// complementary projector onto the first k.
pub fn extremal_dephaser(d: usize, k: usize) -> Result<KrausChannel> {
    if k == 0 || 2 * k >= d {
        return Err(Error::ParamOutOfRange(format!("k = {k} must satisfy 1 <= k < d/2")));
    }
    let a1 = diag_real(&(0..d).map(|i| if i >= k { 1.0 } else { 0.0 }).collect::<Vec<_>>());
    let a2 = diag_real(&(0..d).map(|i| if i < k { 1.0 } else { 0.0 }).collect::<Vec<_>>());
    KrausChannel::new(vec![a1, a2])
}

/// Randomized extremal dephaser: A₁ = diag(σ) with a uniform bulk
/// 1 − σ ∈ [0, bulk] and one outlier 1 − σ₀ = outlier; A₂ = P·diag(√(1−σ²))
/// with P the cyclic shift, so ⟨A₁, A₂⟩ = 0.
pub fn extremal_dephaser_random<R: Rng + ?Sized>(rng: &mut R, d: usize, bulk: f64, outlier: f64) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::ParamOutOfRange("d >= 2 required".into()));
    }
    in_range("bulk", bulk, 0.0, 0.5)?;
    in_range("outlier", outlier, 0.0, 1.0)?;
    let sigma: Vec<f64> = (0..d)
        .map(|i| if i == 0 { 1.0 - outlier } else { 1.0 - bulk * rng.random::<f64>() })
        .collect();
    let a1 = diag_real(&sigma);
    let comp = diag_real(&sigma.iter().map(|s| (1.0 - s * s).max(0.0).sqrt()).collect::<Vec<_>>());
    let a2 = weyl(d, 1, 0) * comp;
    KrausChannel::new(vec![a1, a2])
}

/// Closed-form quantities of the extremal dephaser, valid at any d
/// without building matrices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalDephaserAnalytic {
    pub dim: usize,
    pub phi: f64,
    pub infidelity: f64,
    pub upsilon: f64,
    pub weights: [f64; 2],
    /// Singular values of the LK operator, descending.
    pub sigma: Vec<f64>,
}

pub fn extremal_dephaser_analytic(d: usize) -> ExtremalDephaserAnalytic {
    let df = d as f64;
    let phi = ((df - 1.0).powi(2) + 1.0) / (df * df);
    let weights = [(df - 1.0) / df, 1.0 / df];
    let mut sigma = vec![1.0; d];
    sigma[d - 1] = 0.0;
    ExtremalDephaserAnalytic {
        dim: d,
        phi,
        infidelity: infidelity(phi, d),
        upsilon: (weights[0] * weights[0] + weights[1] * weights[1]).sqrt(),
        weights,
        sigma,
    }
}

/// V = −|0⟩⟨0| + Σ_{i≠0}|i⟩⟨i|.
pub fn extremal_unitary(d: usize) -> ComplexMatrix {
    let mut v = identity(d);
    v[(0, 0)] = c(-1.0, 0.0);
    v
}

/// Two-Kraus qutrit channel whose LK operator has a spiral unitary factor.
pub fn spiral(alpha: f64) -> Result<KrausChannel> {
    let ph = alpha.powi(3) / 2.0;
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let (ch, sh) = ((alpha / 2.0).cos(), (alpha / 2.0).sin());
    let a1 = crate::matcore::diag_complex(&[c(ca, 0.0), C64::from_polar(ch, ph), C64::from_polar(ch, -ph)]);
    let a2 = crate::matcore::diag_complex(&[
        c(sa, 0.0),
        -C64::from_polar(sh, alpha + ph),
        -C64::from_polar(sh, -alpha - ph),
    ]);
    KrausChannel::new(vec![a1, a2])
}

/// Angle θ and dephasing rate q of R(θ)∘dephasing(q) with total
/// infidelity `r` of which a fraction `level` is coherent.
pub fn coherence_mix_params(d: usize, r: f64, level: f64) -> Result<(f64, f64)> {
    in_range("level", level, 0.0, 1.0)?;
    let df = d as f64;
    let phi_total = 1.0 - r * (df + 1.0) / df;
    let phi_rot = 1.0 - level * r * (df + 1.0) / df;
    if !(r > 0.0) || phi_total <= 0.5 {
        return Err(Error::ParamOutOfRange(format!("infidelity {r} out of the non-catastrophic range")));
    }
    if d % 2 == 0 {
        // tr(R Z^b) = 0, so Φ = (1 − q)·cos²θ.
        let theta = phi_rot.sqrt().min(1.0).acos();
        let q = 1.0 - phi_total / phi_rot;
        in_range("q", q, 0.0, 0.5)?;
        return Ok((theta, q));
    }
    // Block embedding: |tr R|/d = (2cos θ + d − 2)/d.
    let cos_t = ((df * phi_rot.sqrt() - (df - 2.0)) / 2.0).clamp(-1.0, 1.0);
    let theta = cos_t.acos();
    let rot = rotation(d, theta, false)?;
    let phi_of = |q: f64| -> Result<f64> {
        let ch = crate::channel::left_multiply(&rot, &dephasing(d, q)?);
        Ok(crate::metrics::phi_unchecked(&ch.kraus, &identity(d)))
    };
    let (mut lo, mut hi) = (0.0, 0.5);
    if phi_of(hi)? > phi_total {
        return Err(Error::ParamOutOfRange("infidelity not reachable with q <= 1/2".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_of(mid)? > phi_total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((theta, 0.5 * (lo + hi)))
}

pub fn coherence_mix(d: usize, r: f64, level: f64) -> Result<KrausChannel> {
    let (theta, q) = coherence_mix_params(d, r, level)?;
    let rot = rotation(d, theta, d % 2 == 0)?;
    Ok(crate::channel::left_multiply(&rot, &dephasing(d, q)?))
}

/// Build the channel described by `spec`.
pub fn make_channel(spec: &FamilySpec) -> Result<KrausChannel> {
    let d = spec.dim;
    if d == 0 {
        return Err(Error::ParamOutOfRange("dim must be positive".into()));
    }
    match spec.family {
        Family::Identity => Ok(KrausChannel::identity(d)),
        Family::Depolarizing => depolarizing(d, spec.get("p")?),
        Family::Dephasing => dephasing(d, spec.get("q")?),
        Family::StochasticWeyl => {
            let mut probs = BTreeMap::new();
            for (k, &v) in &spec.params {
                if let Some(rest) = k.strip_prefix("w_") {
                    let mut it = rest.split('_').map(|s| s.parse::<usize>());
                    match (it.next(), it.next(), it.next()) {
                        (Some(Ok(a)), Some(Ok(b)), None) if a < d && b < d && (a, b) != (0, 0) => {
                            probs.insert((a, b), in_range(k, v, 0.0, 1.0)?);
                        }
                        _ => return Err(Error::ParamOutOfRange(format!("bad Weyl key '{k}'"))),
                    }
                }
            }
            let rest: f64 = probs.values().sum();
            if probs.is_empty() {
                let p = in_range("p", spec.get("p")?, 0.0, 1.0)?;
                let each = (1.0 - p) / (d * d - 1) as f64;
                for a in 0..d {
                    for b in 0..d {
                        if (a, b) != (0, 0) {
                            probs.insert((a, b), each);
                        }
                    }
                }
                probs.insert((0, 0), p);
            } else {
                let p0 = spec.get_or("p", 1.0 - rest);
                probs.insert((0, 0), in_range("p", p0, 0.0, 1.0)?);
            }
            stochastic_weyl(d, &probs)
        }
        Family::AmplitudeDamping => amplitude_damping(d, spec.get("gamma")?),
        Family::Rotation => {
            let theta = spec.get("theta")?;
            if !(theta > -PI && theta <= PI) {
                return Err(Error::ParamOutOfRange(format!("theta = {theta} outside (-pi, pi]")));
            }
            let tensor = d % 2 == 0 && spec.get_or("block", 0.0) == 0.0;
            Ok(KrausChannel::unitary(rotation(d, theta, tensor)?))
        }
        Family::RandomUnitaryError => {
            let eps = in_range("epsilon", spec.get("epsilon")?, 0.0, f64::MAX)?;
            Ok(KrausChannel::unitary(random_unitary_error_rng(&mut trial_rng(spec.seed()?, 0), d, eps)?))
        }
        Family::RandomCptp => {
            let rank = spec.get("kraus_rank")?;
            if rank.fract() != 0.0 || rank < 1.0 {
                return Err(Error::ParamOutOfRange(format!("kraus_rank = {rank}")));
            }
            let mut rng = trial_rng(spec.seed()?, 0);
            match spec.params.get("epsilon") {
                Some(&eps) => near_identity_cptp_rng(&mut rng, d, rank as usize, eps),
                None => random_cptp_rng(&mut rng, d, rank as usize),
            }
        }
        Family::PsdLkDecoherent => psd_lk_decoherent(d, spec.get("strength")?, spec.seed()?),
        Family::ExtremalDephaser => {
            if spec.get_or("randomized", 0.0) != 0.0 {
                let mut rng = trial_rng(spec.seed()?, 0);
                extremal_dephaser_random(&mut rng, d, spec.get_or("bulk", 0.002), spec.get_or("outlier", 0.01))
            } else {
                extremal_dephaser(d, spec.get_or("k", 1.0) as usize)
            }
        }
        Family::ExtremalUnitary => Ok(KrausChannel::unitary(extremal_unitary(d))),
        Family::Spiral => {
            if d != 3 {
                return Err(Error::ParamOutOfRange("spiral is defined for d = 3".into()));
            }
            spiral(spec.get("alpha")?)
        }
        Family::CoherenceMix => coherence_mix(d, spec.get("r")?, spec.get("level")?),
    }
}
