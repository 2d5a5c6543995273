//! Theorem envelopes, coherent envelopes, Lindblad structure checks and a
//! numerical unitary-correction oracle.

mod circuit;
mod envelope;
mod lindblad;
mod optimize;
mod report;
mod theorems;

pub use circuit::{gamma_coh_of, CircuitSpec, CircuitStats, ElementStats};
pub use envelope::{coherent_envelope, Envelope};
pub use lindblad::{canonicalize_lindblad, lindblad_generator, lindblad_structure, LindbladSpec, LindbladStructure};
pub use optimize::{optimize_unitary_correction, OptimizeResult, MAX_DIM};
pub use report::{AltBound, BoundReport, Term, HOLD_TOL};
pub use theorems::*;
