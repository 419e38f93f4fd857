//! Verification laboratory for 2-isometries and Brownian-type block operators
//! on a countably-infinite-dimensional Hilbert space.
//!
//! The crate provides:
//! - lazily evaluated band operators over a labeled countable basis
//!   ([`operator::Operator`]),
//! - residual certificates for the 2-isometry identity and the four-condition
//!   Brownian-unitary characterization ([`certify`]),
//! - constructors for the concrete operator families the certificates are
//!   exercised on ([`families`]),
//! - deviation meters for weak/strong/*-strong/norm convergence of operator
//!   sequences ([`converge`]),
//! - a JSON DSL and CLI front end ([`dsl`], [`cli`]).
//!
//! Start with the `examples/` directory: each example is a runnable
//! demonstration of one capability.

pub mod basis;
pub mod certify;
pub mod cli;
pub mod converge;
pub mod dsl;
pub mod families;
pub mod operator;
pub mod report;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("subspace is not invariant: image of {label} leaves the subspace")]
    InvarianceViolation { label: String },

    #[error("operator does not extend the restriction at label {label}")]
    ExtensionMismatch { label: String },

    #[error("unsupported structure for {op}: {reason}")]
    UnsupportedStructure { op: String, reason: String },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("DSL error at {location}: {reason}")]
    Dsl { location: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
