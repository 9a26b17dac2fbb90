//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// The requested point sits on (or inside the guard window of) a singular locus.
    #[error("singular point in {op}: {msg}")]
    Singular { op: &'static str, msg: String },

    /// System size outside the supported range.
    #[error("size error in {op}: {msg}")]
    Size { op: &'static str, msg: String },

    /// An iterative method did not converge.
    #[error("no convergence in {op}: {msg}")]
    NonConvergence { op: &'static str, msg: String },

    /// The ground state is degenerate where a non-degenerate one is required.
    #[error("degenerate ground state in {op}: gap {gap:e} below {threshold:e}")]
    Degenerate {
        op: &'static str,
        gap: f64,
        threshold: f64,
    },

    /// Perturbative state labelling failed.
    #[error("state identification failed in {op}: best overlap {overlap:.4} < {threshold}")]
    Identification {
        op: &'static str,
        overlap: f64,
        threshold: f64,
    },

    /// Matrix dimensions do not fit the operation.
    #[error("dimension error in {op}: {msg}")]
    Dimension { op: &'static str, msg: String },

    /// Invalid qubit subset for a partial trace.
    #[error("index error in {op}: {msg}")]
    Index { op: &'static str, msg: String },

    /// A density matrix breaks one of its defining invariants.
    #[error("invariant violated in {op}: {msg}")]
    Invariant { op: &'static str, msg: String },
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn singular(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Singular {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn size(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Size {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn no_convergence(op: &'static str, msg: impl Into<String>) -> Self {
        Error::NonConvergence {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn dimension(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Dimension {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn index(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Index {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn invariant(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Invariant {
            op,
            msg: msg.into(),
        }
    }

    /// Name of the operation that raised the error.
    pub fn op(&self) -> &'static str {
        match self {
            Error::Domain { op, .. }
            | Error::Singular { op, .. }
            | Error::Size { op, .. }
            | Error::NonConvergence { op, .. }
            | Error::Degenerate { op, .. }
            | Error::Identification { op, .. }
            | Error::Dimension { op, .. }
            | Error::Index { op, .. }
            | Error::Invariant { op, .. } => op,
        }
    }
}
