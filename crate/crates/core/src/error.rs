use thiserror::Error;

use crate::exprlang::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid point tuple: {0}")]
    Points(String),
    #[error("matrix is {rows} x {cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("exact backend unavailable: {0}")]
    ExactUnavailable(String),
    #[error("evaluation failed for {row} {row_index} at point {point}: {message}")]
    Eval {
        row: &'static str,
        row_index: usize,
        point: usize,
        message: String,
    },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("backend mismatch: {0}")]
    BackendMismatch(&'static str),
    #[error("all {trials} sampled tuples hit evaluation errors; is the region inside the domain of the generators? (last: {last})")]
    AllTrialsFailed { trials: usize, last: String },
    #[error("flow left the admissible domain at step {step}: {message}")]
    DomainExit { step: usize, message: String },
    #[error("stabilization not detected by order {cap} (bound r - s1 + 1); sampled ranks are likely underestimated")]
    CapBreach { cap: usize, s: Vec<usize> },
    #[error("orbit dimension decreased from {prev} at order {order} to {next}; sampled ranks are unreliable")]
    Inconsistent {
        order: usize,
        prev: usize,
        next: usize,
    },
    #[error(
        "no completion found within {budget} attempts (heuristic failure, not a counterexample)"
    )]
    BudgetExhausted { budget: usize },
}

impl Error {
    /// `true` for errors caused by the input (bad files, flags or points)
    /// rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Spec(_)
                | Error::UnknownFixture(_)
                | Error::Io(_)
                | Error::Config(_)
                | Error::Points(_)
                | Error::NotSquare { .. }
                | Error::ExactUnavailable(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
