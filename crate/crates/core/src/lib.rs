//! Canonical Kraus decompositions, leading-Kraus approximations and the
//! channel polar decomposition, with fidelity and unitarity bounds for
//! composed quantum channels.

pub mod bounds;
pub mod channel;
pub mod cli;
pub mod error;
pub mod genlib;
pub mod matcore;
pub mod metrics;
pub mod io;
pub mod polar;
pub mod sweep;
pub mod verify;

pub use channel::{CanonicalDecomposition, ChoiMatrix, KrausChannel, LKMap, Superoperator};
pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, C64};
