//! Crate-wide error type.

use thiserror::Error;

use crate::fan::Violation;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquareMatrix { rows: usize, cols: usize },

    #[error("fan is invalid: {}", format_violations(.0))]
    InvalidFan(Vec<Violation>),

    #[error("ray set {0:?} spans no cone of the fan")]
    NotACone(Vec<usize>),

    #[error("blow-up center must have at least two rays (got {0})")]
    CenterTooSmall(usize),

    #[error("class is not an integral relation among the rays")]
    NotARelation,

    #[error("class belongs to a different fan")]
    FanMismatch,

    #[error(
        "primitive collection {collection:?} meets its focus cone {focus:?}; \
         the fan violates the collection/focus disjointness assumption"
    )]
    FocusOverlap {
        collection: Vec<usize>,
        focus: Vec<usize>,
    },

    #[error("class has no invariant locus: its negative rays span no cone")]
    NoInvariantLocus,

    #[error("class is not contractible")]
    NotContractible,

    #[error("class is not a positive multiple of any primitive relation")]
    NotAPrimitiveClass,

    #[error("variety is not projective")]
    NotProjective,

    #[error("divisor is not ample")]
    NotAmple,

    #[error("class is not in the cone of curves")]
    NotInCurveCone,

    #[error("class is not a nonnegative integral combination of wall classes")]
    NotInWallSpan,

    #[error("class has support outside the star of the given cone")]
    ClassOutsideStar,

    #[error("fan must be 2-dimensional (got dimension {0})")]
    NotASurface(usize),

    #[error("constructed fan has primitive collections different from the given list")]
    CollectionMismatch,

    #[error("unknown ray label `{0}`")]
    UnknownLabel(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
