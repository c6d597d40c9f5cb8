use thiserror::Error;

use crate::metric::Violation;

pub type Result<T, E = LipError> = std::result::Result<T, E>;

/// Errors raised by constructions and evaluators.
///
/// Every variant names the invariant that failed; most carry a witness
/// (offending point, anchor pair, index) so the caller can reproduce it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LipError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("matrix is not a metric: {} violation(s), first: {}", .0.len(), .0[0])]
    NotAMetric(Vec<Violation>),

    #[error("empty window: no anchor within distance {window} of {point}")]
    EmptyWindow { point: String, window: f64 },

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error(
        "inadmissible Lipschitz constant{}: anchors {a} and {b} have slope {slope} > {lambda}",
        piece.map(|n| format!(" in piece {n}")).unwrap_or_default()
    )]
    Inadmissible {
        a: usize,
        b: usize,
        slope: f64,
        lambda: f64,
        piece: Option<usize>,
    },

    #[error("point {point} is not covered by any set")]
    Uncovered { point: String },

    #[error("range error: {0}")]
    Range(String),

    #[error("inconsistent clamp at {point}: point lies both on the anchor set and off the open set")]
    Inconsistent { point: String },

    #[error("{point} is not an anchor of the function")]
    NotAnAnchor { point: String },

    #[error("parse error: {0}")]
    Parse(String),
}

impl LipError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        LipError::Argument(msg.into())
    }

    /// Attach a piece index to an admissibility failure.
    pub(crate) fn in_piece(self, n: usize) -> Self {
        match self {
            LipError::Inadmissible {
                a,
                b,
                slope,
                lambda,
                ..
            } => LipError::Inadmissible {
                a,
                b,
                slope,
                lambda,
                piece: Some(n),
            },
            other => other,
        }
    }
}
