use crate::error::{Error, Result};
use crate::matcore::{c, ensure_finite, fro, hermitian_defect, hs_inner, identity, kron, ComplexMatrix};

const TRACELESS_TOL: f64 = 1e-9;
const ORTHO_TOL: f64 = 1e-9;

/// Generator data: Hamiltonian H and Lindblad operators L_k.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSpec {
    pub dim: usize,
    pub hamiltonian: ComplexMatrix,
    pub lindblad_ops: Vec<ComplexMatrix>,
}

impl LindbladSpec {
    pub fn new(hamiltonian: ComplexMatrix, lindblad_ops: Vec<ComplexMatrix>) -> Result<Self> {
        let d = hamiltonian.nrows();
        if hamiltonian.ncols() != d || lindblad_ops.iter().any(|l| l.nrows() != d || l.ncols() != d) {
            return Err(Error::DimensionMismatch("Lindblad operators must be d x d".into()));
        }
        ensure_finite(&hamiltonian)?;
        for l in &lindblad_ops {
            ensure_finite(l)?;
        }
        let defect = hermitian_defect(&hamiltonian);
        if defect > 1e-9 {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { dim: d, hamiltonian, lindblad_ops })
    }

    /// P = ½ Σ L_k†L_k.
    pub fn damping(&self) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.dim, self.dim);
        for l in &self.lindblad_ops {
            p += l.adjoint() * l;
        }
        p * c(0.5, 0.0)
    }
}

/// The three superoperator terms of the column-stacked generator.
#[derive(Debug, Clone)]
pub struct LindbladStructure {
    /// −i(I⊗H − Hᵀ⊗I).
    pub term_i: ComplexMatrix,
    /// −½ Σ (I⊗L†L + (L†L)ᵀ⊗I).
    pub term_ii: ComplexMatrix,
    /// Σ conj(L)⊗L.
    pub term_iii: ComplexMatrix,
    /// |⟨i,ii⟩|, |⟨i,iii⟩|, |⟨ii,iii⟩|.
    pub inner_products: [f64; 3],
    pub orthogonal: bool,
}

impl LindbladStructure {
    pub fn generator(&self) -> ComplexMatrix {
        &self.term_i + &self.term_ii + &self.term_iii
    }
}

fn terms(spec: &LindbladSpec) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let d = spec.dim;
    let id = identity(d);
    let h = &spec.hamiltonian;
    let term_i = (kron(&id, h) - kron(&h.transpose(), &id)) * c(0.0, -1.0);
    let k = spec.damping() * c(2.0, 0.0);
    let term_ii = (kron(&id, &k) + kron(&k.transpose(), &id)) * c(-0.5, 0.0);
    let mut term_iii = ComplexMatrix::zeros(d * d, d * d);
    for l in &spec.lindblad_ops {
        term_iii += kron(&l.conjugate(), l);
    }
    (term_i, term_ii, term_iii)
}

/// Full generator; accepts Lindblad operators with a trace.
pub fn lindblad_generator(spec: &LindbladSpec) -> ComplexMatrix {
    let (a, b, c) = terms(spec);
    a + b + c
}

fn orthogonal_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> (f64, bool) {
    let ip = hs_inner(a, b).norm();
    (ip, ip <= ORTHO_TOL * fro(a) * fro(b))
}

pub fn lindblad_structure(spec: &LindbladSpec) -> Result<LindbladStructure> {
    let d = spec.dim as f64;
    for (k, l) in spec.lindblad_ops.iter().enumerate() {
        if l.trace().norm() > TRACELESS_TOL * d.sqrt() * fro(l).max(1.0) {
            return Err(Error::NotTraceless(k));
        }
    }
    let (term_i, term_ii, term_iii) = terms(spec);
    let (a, oa) = orthogonal_pair(&term_i, &term_ii);
    let (b, ob) = orthogonal_pair(&term_i, &term_iii);
    let (e, oe) = orthogonal_pair(&term_ii, &term_iii);
    Ok(LindbladStructure { term_i, term_ii, term_iii, inner_products: [a, b, e], orthogonal: oa && ob && oe })
}

/// Equivalent generator with traceless L′_k = L_k − c_k I, c_k = tr L_k/d,
/// and H′ = H + (i/2) Σ (c̄_k L′_k − c_k L′_k†).
pub fn canonicalize_lindblad(spec: &LindbladSpec) -> LindbladSpec {
    let d = spec.dim;
    let id = identity(d);
    let mut h = spec.hamiltonian.clone();
    let mut ops = Vec::with_capacity(spec.lindblad_ops.len());
    for l in &spec.lindblad_ops {
        let ck = l.trace() / c(d as f64, 0.0);
        let lp = l - &id * ck;
        h += (&lp * ck.conj() - lp.adjoint() * ck) * c(0.0, 0.5);
        ops.push(lp);
    }
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    LindbladSpec { dim: d, hamiltonian: h, lindblad_ops: ops }
}
