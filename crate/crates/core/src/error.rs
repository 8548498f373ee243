use thiserror::Error;

/// Errors raised by the analyses in this crate.
///
/// Every variant names the operation that failed so that a driver can
/// report which precondition was violated without extra context.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph description: {0}")]
    Parse(String),

    #[error("graph description: duplicate edge {0} -> {1}")]
    DuplicateEdge(usize, usize),

    #[error("graph description: vertex id {id} is out of range (vertex count {count})")]
    DanglingVertex { id: usize, count: usize },

    #[error("bouquet rule is undefined at loop length {0}")]
    BouquetRuleUndefined(usize),

    #[error("{op}: vertex {vertex} is wandering (no cycle through it)")]
    Wandering { op: &'static str, vertex: usize },

    #[error("{op}: component has no cycle")]
    Acyclic { op: &'static str },

    #[error("{op}: graph is not irreducible")]
    Reducible { op: &'static str },

    #[error("{op}: precondition violated: {detail}")]
    Precondition { op: &'static str, detail: String },

    #[error("{op}: power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        op: &'static str,
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("{op}: {detail}")]
    Degenerate { op: &'static str, detail: String },
}

impl Error {
    pub(crate) fn precondition(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn degenerate(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Degenerate {
            op,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
