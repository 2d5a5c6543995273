//! Kraus/Choi/superoperator representations, canonical Kraus form,
//! the leading-Kraus map and composition.

use std::cmp::Ordering;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    c, col, fro, fro_sqr, hermitian_eig, hs_inner, identity, kron, lex_cmp, phase_fix_matrix,
    spectral_norm, uncol, zeros, ComplexMatrix, C64,
};

/// Weight gap under which the two largest canonical weights count as tied.
pub const DEGENERATE_LEADING_TOL: f64 = 1e-10;
const TP_TOL: f64 = 1e-9;

/// A channel as a list of d×d Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub dim: usize,
    pub kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Checks shapes and finiteness only; use [`validate_cptp`] for physics.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::DimensionMismatch("empty Kraus list".into()))?;
        let dim = first.nrows();
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {}x{} in dimension {}",
                    k.nrows(),
                    k.ncols(),
                    dim
                )));
            }
            crate::matcore::ensure_finite(k)?;
        }
        Ok(Self { dim, kraus })
    }

    pub fn identity(d: usize) -> Self {
        Self { dim: d, kraus: vec![identity(d)] }
    }

    pub fn unitary(u: ComplexMatrix) -> Self {
        Self { dim: u.nrows(), kraus: vec![u] }
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// Gram matrix G_ij = ⟨A_i, A_j⟩.
    pub fn gram(&self) -> ComplexMatrix {
        let k = self.kraus.len();
        let mut g = zeros(k);
        for i in 0..k {
            for j in i..k {
                let v = hs_inner(&self.kraus[i], &self.kraus[j]);
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        compose(&[self.clone(), other.clone()])
    }
}

/// Choi matrix Σ E_ij ⊗ A(E_ij).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub dim: usize,
    pub matrix: ComplexMatrix,
}

/// Superoperator acting on column-stacked operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub dim: usize,
    pub matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch("state dimension".into()));
        }
        let v: DVector<C64> = &self.matrix * col(rho);
        Ok(uncol(v.as_slice(), self.dim))
    }
}

/// Canonical (orthogonal, weight-ordered) Kraus decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDecomposition {
    pub dim: usize,
    pub kraus: Vec<ComplexMatrix>,
    /// ‖A_i‖²/d, descending.
    pub weights: Vec<f64>,
    pub degenerate_leading: bool,
}

impl CanonicalDecomposition {
    pub fn to_channel(&self) -> KrausChannel {
        KrausChannel { dim: self.dim, kraus: self.kraus.clone() }
    }

    pub fn leading(&self) -> &ComplexMatrix {
        &self.kraus[0]
    }

    pub fn lk(&self, strict: bool) -> Result<LKMap> {
        if strict && self.degenerate_leading {
            let gap = self.weights[0] - self.weights.get(1).copied().unwrap_or(0.0);
            return Err(Error::DegenerateLeading(gap));
        }
        Ok(LKMap::new(self.kraus[0].clone()))
    }

    /// Υ = sqrt(Σ w_i²).
    pub fn upsilon(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// Leading-Kraus approximation ρ ↦ A₁ρA₁†.
#[derive(Debug, Clone, PartialEq)]
pub struct LKMap {
    pub dim: usize,
    pub a1: ComplexMatrix,
    /// ‖A₁‖²/d.
    pub weight: f64,
    /// Set when the weight is at most 1/2.
    pub catastrophic_warning: bool,
}

impl LKMap {
    pub fn new(a1: ComplexMatrix) -> Self {
        let dim = a1.nrows();
        let weight = fro_sqr(&a1) / dim as f64;
        Self { dim, a1, weight, catastrophic_warning: weight <= 0.5 }
    }

    /// Largest singular value of A₁.
    pub fn spectral_radius(&self) -> Result<f64> {
        spectral_norm(&self.a1)
    }
}

/// Outcome of a CPTP check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Most negative Choi eigenvalue, 0 if none.
    pub cp_slack: f64,
    /// ‖Σ A_i†A_i − I‖.
    pub tp_slack: f64,
    pub ok: bool,
}

fn cp_tolerance(d: usize) -> f64 {
    1e-10 * d as f64
}

pub fn validate_cptp(ch: &KrausChannel) -> ValidationReport {
    let d = ch.dim;
    let mut s = zeros(d);
    for a in &ch.kraus {
        s += a.adjoint() * a;
    }
    let tp_slack = fro(&(s - identity(d)));
    // A Kraus list is CP by construction.
    ValidationReport { cp_slack: 0.0, tp_slack, ok: tp_slack <= TP_TOL }
}

pub fn validate_choi(ch: &ChoiMatrix) -> Result<ValidationReport> {
    let d = ch.dim;
    if ch.matrix.nrows() != d * d || ch.matrix.ncols() != d * d {
        return Err(Error::DimensionMismatch(format!("Choi matrix must be {0}x{0}", d * d)));
    }
    let eig = hermitian_eig(&ch.matrix)?;
    let cp_slack = eig.values.last().copied().unwrap_or(0.0).min(0.0);
    let tp_slack = fro(&(partial_trace_output(ch) - identity(d)));
    Ok(ValidationReport {
        cp_slack,
        tp_slack,
        ok: cp_slack >= -cp_tolerance(d) && tp_slack <= TP_TOL,
    })
}

/// Tr over the output factor; equals (Σ A†A)ᵀ.
fn partial_trace_output(ch: &ChoiMatrix) -> ComplexMatrix {
    let d = ch.dim;
    ComplexMatrix::from_fn(d, d, |i, j| (0..d).map(|k| ch.matrix[(i * d + k, j * d + k)]).sum())
}

pub fn to_choi(ch: &KrausChannel) -> ChoiMatrix {
    let d = ch.dim;
    let mut m = zeros(d * d);
    for a in &ch.kraus {
        let v = col(a);
        m += &v * v.adjoint();
    }
    ChoiMatrix { dim: d, matrix: m }
}

pub fn to_superop(ch: &KrausChannel) -> Superoperator {
    let d = ch.dim;
    let mut m = zeros(d * d);
    for a in &ch.kraus {
        m += kron(&a.conjugate(), a);
    }
    Superoperator { dim: d, matrix: m }
}

/// Σ A_i ρ A_i†.
pub fn apply(ch: &KrausChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.nrows() != ch.dim || rho.ncols() != ch.dim {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, channel dimension {}",
            rho.nrows(),
            rho.ncols(),
            ch.dim
        )));
    }
    let mut out = zeros(ch.dim);
    for a in &ch.kraus {
        out += a * rho * a.adjoint();
    }
    Ok(out)
}

/// Turn (eigenvalue, operator with ‖B‖² = eigenvalue) pairs into a
/// canonical decomposition: clip, drop, fix phases, order.
fn finish_canonical(d: usize, pairs: Vec<(f64, ComplexMatrix)>) -> Result<CanonicalDecomposition> {
    let df = d as f64;
    let mut kept: Vec<(f64, ComplexMatrix)> = Vec::new();
    for (lambda, mut b) in pairs {
        if lambda < -cp_tolerance(d) {
            return Err(Error::NotCP(lambda));
        }
        if lambda <= 1e-12 * df {
            continue;
        }
        // Renormalize to the eigenvalue; the eigenvector route is exact up to rounding.
        let n = fro(&b);
        if n > 0.0 {
            b *= c(lambda.sqrt() / n, 0.0);
        }
        phase_fix_matrix(&mut b);
        kept.push((lambda / df, b));
    }
    if kept.is_empty() {
        return Err(Error::NotCP(0.0));
    }
    kept.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    // Deterministic order inside blocks of equal weight.
    let mut start = 0;
    while start < kept.len() {
        let mut end = start + 1;
        while end < kept.len() && kept[end - 1].0 - kept[end].0 <= DEGENERATE_LEADING_TOL {
            end += 1;
        }
        if end - start > 1 {
            kept[start..end].sort_by(|x, y| {
                let xs: Vec<C64> = x.1.transpose().iter().copied().collect();
                let ys: Vec<C64> = y.1.transpose().iter().copied().collect();
                lex_cmp(&xs, &ys)
            });
        }
        start = end;
    }
    let t = kept[0].1.trace();
    if t.norm() > 1e-9 {
        let ph = (t / t.norm()).conj();
        kept[0].1 *= ph;
    }
    let degenerate_leading =
        kept.len() > 1 && kept[0].0 - kept[1].0 < DEGENERATE_LEADING_TOL;
    let (weights, kraus) = kept.into_iter().unzip();
    Ok(CanonicalDecomposition { dim: d, kraus, weights, degenerate_leading })
}

/// Canonical Kraus operators from the spectral decomposition of a Choi matrix.
pub fn from_choi(ch: &ChoiMatrix) -> Result<CanonicalDecomposition> {
    let d = ch.dim;
    if ch.matrix.nrows() != d * d || ch.matrix.ncols() != d * d {
        return Err(Error::DimensionMismatch(format!("Choi matrix must be {0}x{0}", d * d)));
    }
    let eig = hermitian_eig(&ch.matrix)?;
    let pairs = eig
        .values
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let v: Vec<C64> = eig.vectors.column(k).iter().copied().collect();
            (l, uncol(&v, d))
        })
        .collect();
    finish_canonical(d, pairs)
}

/// Canonical decomposition of a Kraus channel.
///
/// Equivalent to `from_choi(to_choi(ch))`. For short Kraus lists the
/// Gram matrix G = K†K (K the matrix of stacked columns) shares the
/// nonzero spectrum of the Choi matrix K·K†, and its eigenvectors mix the
/// given operators into the Choi eigen-operators directly.
pub fn canonical(ch: &KrausChannel) -> Result<CanonicalDecomposition> {
    let d = ch.dim;
    let k = ch.kraus.len();
    if k > d * d {
        return from_choi(&to_choi(ch));
    }
    let eig = hermitian_eig(&ch.gram())?;
    let pairs = eig
        .values
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let mut b = zeros(d);
            for (i, a) in ch.kraus.iter().enumerate() {
                b += a * eig.vectors[(i, j)];
            }
            (l, b)
        })
        .collect();
    finish_canonical(d, pairs)
}

pub fn lk(ch: &KrausChannel, strict: bool) -> Result<LKMap> {
    canonical(ch)?.lk(strict)
}

fn same_dim(chs: &[KrausChannel]) -> Result<usize> {
    let d = chs.first().ok_or_else(|| Error::DimensionMismatch("empty circuit".into()))?.dim;
    if chs.iter().any(|c| c.dim != d) {
        return Err(Error::DimensionMismatch("channels of different dimension".into()));
    }
    Ok(d)
}

/// A_m ∘ ⋯ ∘ A_1 with `chs[0]` applied first. The product family is
/// re-canonicalized whenever it grows past d² operators.
pub fn compose(chs: &[KrausChannel]) -> Result<KrausChannel> {
    let d = same_dim(chs)?;
    let mut acc = chs[0].clone();
    for next in &chs[1..] {
        let mut kraus = Vec::with_capacity(acc.len() * next.len());
        for b in &next.kraus {
            for a in &acc.kraus {
                kraus.push(b * a);
            }
        }
        acc = KrausChannel { dim: d, kraus };
        if acc.len() > d * d {
            acc = canonical(&acc)?.to_channel();
        }
    }
    Ok(acc)
}

/// Product of LK operators in circuit order.
pub fn compose_lk(lks: &[LKMap]) -> Result<LKMap> {
    let first = lks.first().ok_or_else(|| Error::DimensionMismatch("empty circuit".into()))?;
    let mut p = first.a1.clone();
    for l in &lks[1..] {
        if l.dim != first.dim {
            return Err(Error::DimensionMismatch("LK maps of different dimension".into()));
        }
        p = &l.a1 * p;
    }
    Ok(LKMap::new(p))
}

/// ρ ↦ U ρ U†.
pub fn unitary_channel(u: &ComplexMatrix) -> KrausChannel {
    KrausChannel::unitary(u.clone())
}

/// Channel with every Kraus operator multiplied on the left by `u`.
pub fn left_multiply(u: &ComplexMatrix, ch: &KrausChannel) -> KrausChannel {
    KrausChannel { dim: ch.dim, kraus: ch.kraus.iter().map(|a| u * a).collect() }
}

/// Channel with every Kraus operator multiplied on the right by `u`.
pub fn right_multiply(ch: &KrausChannel, u: &ComplexMatrix) -> KrausChannel {
    KrausChannel { dim: ch.dim, kraus: ch.kraus.iter().map(|a| a * u).collect() }
}

/// Largest deviation between two channels on a set of states.
pub fn max_apply_distance(a: &KrausChannel, b: &KrausChannel, states: &[ComplexMatrix]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for rho in states {
        worst = worst.max(fro(&(apply(a, rho)? - apply(b, rho)?)));
    }
    Ok(worst)
}

/// Scalar multiple of the identity, a convenience for tests and generators.
pub fn scaled_identity(d: usize, s: f64) -> ComplexMatrix {
    identity(d) * c(s, 0.0)
}
