//! Dense complex linear algebra used everywhere else, plus the three
//! trace/norm inequalities that the bound proofs lean on.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Tolerance below which degenerate eigenvalues are grouped.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Rounding grid for ordering vectors inside a degenerate block.
const LEX_GRID: f64 = 1e-8;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(d, d)
}

/// Build a matrix from real entries in row-major order.
pub fn from_real_rows(d: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(d, d, entries.iter().map(|&x| c(x, 0.0)))
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let d = values.len();
    let mut m = zeros(d);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = c(v, 0.0);
    }
    m
}

pub fn diag_complex(values: &[C64]) -> ComplexMatrix {
    let d = values.len();
    let mut m = zeros(d);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = v;
    }
    m
}

pub fn pauli_x() -> ComplexMatrix {
    from_real_rows(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    from_real_rows(2, &[1.0, 0.0, 0.0, -1.0])
}

/// |i⟩⟨j| in dimension d.
pub fn ket_bra(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = zeros(d);
    m[(i, j)] = ONE;
    m
}

/// Hilbert–Schmidt inner product ⟨A, B⟩ = tr(A†B).
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Frobenius (Hilbert–Schmidt) norm.
pub fn fro(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn fro_sqr(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Column stacking: col(A) = Σ A_ij e_j ⊗ e_i.
pub fn col(a: &ComplexMatrix) -> DVector<C64> {
    DVector::from_column_slice(a.as_slice())
}

/// Inverse of [`col`].
pub fn uncol(v: &[C64], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(d, d, v)
}

pub fn all_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(a: &ComplexMatrix) -> Result<()> {
    if all_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn ensure_square(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// ‖U†U − I‖ (Frobenius).
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let d = u.nrows();
    fro(&(u.adjoint() * u - identity(d)))
}

pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    fro(&(m - m.adjoint()))
}

/// Index of the entry used to fix a global phase: the largest modulus,
/// first in row-major order among near-ties.
fn phase_anchor(entries: impl Iterator<Item = (usize, C64)> + Clone) -> Option<(usize, C64)> {
    let max = entries.clone().map(|(_, z)| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    let cut = max * (1.0 - 1e-12);
    entries
        .filter(|(_, z)| z.norm() >= cut)
        .min_by_key(|(k, _)| *k)
}

/// Multiply a matrix by a global phase so its largest-modulus entry
/// (ties broken row-major) is real positive.
pub fn phase_fix_matrix(a: &mut ComplexMatrix) {
    let (r, cols) = a.shape();
    let it = (0..r * cols).map(|k| (k, a[(k / cols, k % cols)]));
    if let Some((_, z)) = phase_anchor(it) {
        let ph = (z / z.norm()).conj();
        a.iter_mut().for_each(|x| *x *= ph);
    }
}

fn phase_fix_vector(v: &mut [C64]) {
    let it = v.iter().copied().enumerate().collect::<Vec<_>>();
    if let Some((_, z)) = phase_anchor(it.into_iter()) {
        let ph = (z / z.norm()).conj();
        v.iter_mut().for_each(|x| *x *= ph);
    }
}

/// Lexicographic comparison of two entry sequences rounded to a grid.
pub fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    let key = |z: &C64| ((z.re / LEX_GRID).round() as i64, (z.im / LEX_GRID).round() as i64);
    for (x, y) in a.iter().zip(b.iter()) {
        match key(x).cmp(&key(y)) {
            Ordering::Equal => continue,
            o => return o.reverse(),
        }
    }
    Ordering::Equal
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
    /// Some pair of eigenvalues lies within the degeneracy tolerance.
    pub degenerate: bool,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.vectors.nrows();
        let mut m = zeros(d);
        for (k, &l) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            m += (&v * v.adjoint()) * c(l, 0.0);
        }
        m
    }
}

/// Eigendecomposition with descending values and a deterministic
/// eigenvector order inside degenerate blocks.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    let n = ensure_square(m)?;
    ensure_finite(m)?;
    let asym = hermitian_defect(m);
    let scale = fro(m);
    if asym > 1e-8 * scale {
        return Err(Error::NotHermitian(asym / scale.max(f64::MIN_POSITIVE)));
    }
    if n == 0 {
        return Ok(HermitianEig { values: vec![], vectors: zeros(0), degenerate: false });
    }
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 1000 * n).ok_or(Error::NoConvergence)?;

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
            phase_fix_vector(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));

    let tol = DEGENERACY_TOL * pairs[0].0.abs().max(pairs[n - 1].0.abs()).max(1.0);
    let mut degenerate = false;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end - 1].0 - pairs[end].0 <= tol {
            end += 1;
        }
        if end - start > 1 {
            degenerate = true;
            pairs[start..end].sort_by(|a, b| lex_cmp(&a.1, &b.1));
        }
        start = end;
    }

    let values = pairs.iter().map(|p| p.0).collect();
    let mut vectors = zeros(n);
    for (k, (_, v)) in pairs.iter().enumerate() {
        for (i, z) in v.iter().enumerate() {
            vectors[(i, k)] = *z;
        }
    }
    Ok(HermitianEig { values, vectors, degenerate })
}

/// Eigenvalues only, descending.
pub fn eigvalsh(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?.values)
}

/// Singular value decomposition A = W·diag(σ)·Y† with σ descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub w: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub y: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    ensure_finite(a)?;
    let n = a.nrows();
    let s = SVD::try_new(a.clone(), true, true, f64::EPSILON, 1000 * n.max(1)).ok_or(Error::NoConvergence)?;
    let u = s.u.ok_or(Error::NoConvergence)?;
    let vt = s.v_t.ok_or(Error::NoConvergence)?;
    let k = s.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        s.singular_values[j]
            .partial_cmp(&s.singular_values[i])
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut w = ComplexMatrix::zeros(u.nrows(), k);
    let mut y = ComplexMatrix::zeros(vt.ncols(), k);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        w.set_column(dst, &u.column(src));
        y.set_column(dst, &vt.row(src).adjoint());
        sigma.push(s.singular_values[src]);
    }
    Ok(Svd { w, sigma, y })
}

pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    ensure_finite(a)?;
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(Ordering::Equal));
    Ok(s)
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Trace norm tr|A|.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// exp(−i·t·H) for Hermitian H.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let e = hermitian_eig(h)?;
    let d = h.nrows();
    let mut out = zeros(d);
    for (k, &l) in e.values.iter().enumerate() {
        let v = e.vectors.column(k);
        out += (&v * v.adjoint()) * C64::from_polar(1.0, -t * l);
    }
    Ok(out)
}

/// Polar factors of a square matrix.
#[derive(Debug, Clone)]
pub struct MatrixPolar {
    /// V, unitary; tr V ∈ ℝ₊ when `phase_fixed`.
    pub unitary: ComplexMatrix,
    /// |A| = (A†A)^{1/2}.
    pub psd: ComplexMatrix,
    pub phase_fixed: bool,
    /// Unit phase removed from V, so that A = phase·V·|A|.
    pub phase: C64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

impl MatrixPolar {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.unitary * &self.psd * self.phase
    }

    /// V before the global phase was removed.
    pub fn raw_unitary(&self) -> ComplexMatrix {
        &self.unitary * self.phase
    }

    pub fn full_rank(&self) -> bool {
        self.rank == self.singular_values.len()
    }
}

/// Polar decomposition A = V·|A| through the SVD.
///
/// On rank-deficient input the null block of V is completed by the
/// unitary closest to the identity in Frobenius norm. When |tr V| > 1e-9
/// a global phase is moved out of V so that tr V is real positive.
pub fn polar_decompose(a: &ComplexMatrix) -> Result<MatrixPolar> {
    let d = ensure_square(a)?;
    ensure_finite(a)?;
    let s = svd(a)?;
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let rank = s.sigma.iter().filter(|&&x| x > 1e-12 * smax).count();

    let mut v = zeros(d);
    for k in 0..rank {
        v += s.w.column(k) * s.y.column(k).adjoint();
    }
    if rank < d {
        let wn = s.w.columns(rank, d - rank).into_owned();
        let yn = s.y.columns(rank, d - rank).into_owned();
        let m = yn.adjoint() * &wn;
        let ms = svd(&m)?;
        // Q = Z·X† maximizes Re tr(Q·M) for M = X·S·Z†.
        let q = &ms.y * ms.w.adjoint();
        v += &wn * q * yn.adjoint();
    }

    let mut psd = zeros(d);
    for k in 0..d {
        psd += (s.y.column(k) * s.y.column(k).adjoint()) * c(s.sigma[k], 0.0);
    }
    psd = (&psd + psd.adjoint()) * c(0.5, 0.0);

    let t = v.trace();
    let (phase, phase_fixed) = if t.norm() > 1e-9 {
        (t / t.norm(), true)
    } else {
        (ONE, false)
    };
    if phase_fixed {
        v *= phase.conj();
    }
    Ok(MatrixPolar { unitary: v, psd, phase_fixed, phase, singular_values: s.sigma, rank })
}

/// Both sides of an inequality plus its verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Three-sided sandwich lower ≤ middle ≤ upper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichCheck {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub holds: bool,
}

const PREDICATE_TOL: f64 = 1e-10;

fn same_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize> {
    let d = ensure_square(a)?;
    if ensure_square(b)? != d {
        return Err(Error::DimensionMismatch(format!("{} vs {}", d, b.nrows())));
    }
    Ok(d)
}

/// tr(AB)/d ≥ ρ_B·trA/d + ρ_A·trB/d − ρ_A·ρ_B for Hermitian A, B, with
/// ρ the largest eigenvalue.
pub fn check_trace_inequality(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<InequalityCheck> {
    let d = same_dims(a, b)? as f64;
    let ra = eigvalsh(a)?[0];
    let rb = eigvalsh(b)?[0];
    let lhs = (a * b).trace().re / d;
    let rhs = rb * a.trace().re / d + ra * b.trace().re / d - ra * rb;
    Ok(InequalityCheck { lhs, rhs, holds: lhs >= rhs - PREDICATE_TOL })
}

/// |tr(AB)|/d ≤ min(ρ_B·tr|A|/d, ρ_A·tr|B|/d) with ρ the largest singular value.
pub fn check_vn_inequality(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<InequalityCheck> {
    let d = same_dims(a, b)? as f64;
    let sa = singular_values(a)?;
    let sb = singular_values(b)?;
    let (ra, rb) = (sa[0], sb[0]);
    let lhs = (a * b).trace().norm() / d;
    let rhs = (rb * sa.iter().sum::<f64>() / d).min(ra * sb.iter().sum::<f64>() / d);
    Ok(InequalityCheck { lhs, rhs, holds: lhs <= rhs + PREDICATE_TOL })
}

/// ‖A‖²/d + ‖B‖²/d − 1 ≤ ‖AB‖²/d ≤ min(‖A‖²/d, ‖B‖²/d) for contractions.
pub fn check_norm_inequality(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<SandwichCheck> {
    let d = same_dims(a, b)? as f64;
    for m in [a, b] {
        let r = spectral_norm(m)?;
        if r > 1.0 + PREDICATE_TOL {
            return Err(Error::NotContraction(r));
        }
    }
    let na = fro_sqr(a) / d;
    let nb = fro_sqr(b) / d;
    let lower = na + nb - 1.0;
    let middle = fro_sqr(&(a * b)) / d;
    let upper = na.min(nb);
    let holds = lower <= middle + PREDICATE_TOL && middle <= upper + PREDICATE_TOL;
    Ok(SandwichCheck { lower, middle, upper, holds })
}
