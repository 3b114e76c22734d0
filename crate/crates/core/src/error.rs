//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Geometric predicates fail loudly on inputs that violate general position
/// instead of perturbing them silently; callers that want recovery apply
/// seeded jitter before retrying.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    /// Fewer points than the requested order k.
    #[error("point set has {have} points but the operation needs at least {need}")]
    InsufficientPoints { have: usize, need: usize },

    /// A periodic (minimum-image) computation would wrap around the box.
    #[error("radius {radius} exceeds the periodic cutoff {limit} (= L/4)")]
    PeriodicCutoffExceeded { radius: f64, limit: f64 },

    /// Tuple points are affinely dependent beyond tolerance.
    #[error("degenerate tuple {labels:?}: affine independence fails beyond tolerance")]
    DegenerateTuple { labels: Vec<u32> },

    /// A query point lies on a facet hull within tolerance, so the side
    /// of the facet cannot be decided.
    #[error("ambiguous side for tuple {labels:?}: point lies on a facet hull within tolerance")]
    AmbiguousSide { labels: Vec<u32> },

    /// A point outside the tuple lies on its circumsphere within tolerance.
    #[error(
        "general position violated at tuple {labels:?}: extra point {witness} on the circumsphere"
    )]
    GeneralPosition { labels: Vec<u32>, witness: u32 },

    /// Geometry is only implemented for n = 2 and n = 3.
    #[error("dimension {dim} is not supported by this operation")]
    UnsupportedDimension { dim: usize },

    /// Invalid argument for a closed-form evaluation.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Inadmissible interval type passed to a counting formula.
    #[error("inadmissible interval type (v={v}, u={u}, g={g})")]
    InvalidType { v: usize, u: usize, g: usize },

    /// The C-table has no entry for the requested (v, u, n).
    #[error("missing constant C_{v}^{{{u},{n}}} in the supplied table")]
    MissingConstant { v: usize, u: usize, n: usize },

    /// Instance exceeds the brute-force oracle guard.
    #[error("oracle guard: {points} points at order {k} exceeds the supported size")]
    TooLarge { points: usize, k: usize },

    /// A requested tessellation feature touches the window boundary.
    #[error("feature touches the window boundary; its dual cell is contaminated")]
    BoundaryContamination,

    /// Two relaxed intervals claimed the same cell; indicates a geometry bug.
    #[error("cell ({i:?}, {u:?}) claimed by two relaxed intervals")]
    DuplicateCellOwnership { i: Vec<u32>, u: Vec<u32> },

    /// The r_max audit failed: an accepted interval sits too close to the cutoff.
    #[error("bias flag: interval radius {radius} is within 1% of the cutoff {cutoff}")]
    BiasFlag { radius: f64, cutoff: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
