//! Orbit dimensions of Lie group actions on products `M^{x n}`, their
//! stabilization order, and the Wronskian test for linear independence of
//! functions on a region.

pub mod actionmodel;
pub mod diagnostics;
pub mod error;
pub mod exprlang;
pub mod independence;
pub mod jointmatrix;
pub mod rankcore;
pub mod rational;
pub mod stabilizer;

pub use actionmodel::{
    builtin_fixture, load_document, ActionSpec, Backend, BackendChoice, Document, FunctionFamily,
    Region, SampleCfg,
};
pub use error::{Error, Result};
pub use jointmatrix::{lie_matrix, wronskian_matrix, JointMatrix, PointTuple};
pub use rankcore::{exact_rank, generic_rank, numeric_rank, GenericRank, RankReport};
pub use stabilizer::{stabilize, StabilizationReport};
