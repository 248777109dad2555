//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation
    /// (e.g. evaluating the well slope at t ≤ 0).
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Value outside the invertible range of the well slope.
    #[error("range error in {op}: {detail}")]
    Range { op: &'static str, detail: String },

    /// A bisection bracket could not be established or lost its sign
    /// change; for the well slope this signals a monotonicity failure.
    #[error("bracket failure in {op}: {detail}")]
    Bracket { op: &'static str, detail: String },

    /// Invalid parameter combination when building a spec.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// A geometric or resolution precondition of a bound/construction
    /// does not hold; the theorem-level statement is inapplicable.
    #[error("precondition violated in {op}: {detail}")]
    Precondition { op: &'static str, detail: String },

    /// Winding number requested along a contour where |u| dips below
    /// the safe threshold.
    #[error("degenerate modulus on contour: min |u| = {min_modulus:.3e} < {threshold}")]
    DegenerateModulus { min_modulus: f64, threshold: f64 },

    /// Serialization / deserialization of field snapshots.
    #[error("snapshot io: {0}")]
    SnapshotIo(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
