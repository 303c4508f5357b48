//! Sparse polynomial and trigonometric approximation of high-dimensional
//! functions from random samples.
//!
//! The library builds surrogate models `f ≈ Σ_ι c_ι φ_ι` for scalar- and
//! vector-valued targets from pointwise data, with an emphasis on *where to
//! sample*. It provides:
//!
//! - multi-index sets (tensor-product, total-degree, hyperbolic-cross) and
//!   lower-set machinery ([`indices`]);
//! - tensor Legendre and Fourier dictionaries and evaluation matrices
//!   ([`basis`]);
//! - sampling domains inside `[-1,1]^d` and Monte Carlo grids carrying the
//!   uniform discrete measure ([`domain`]);
//! - QR orthogonalization of a dictionary over a discrete grid, for irregular
//!   domains ([`ortho`]);
//! - sampling plans: Monte Carlo, Christoffel-based least-squares-optimal
//!   (nonhierarchical and hierarchical), max-basis-based optimal for ℓ¹
//!   recovery, and arcsine preconditioning, plus the diagnostic constants
//!   θ², Θ², Nikolskii and Riesz ([`sampling`]);
//! - weighted least-squares fitting with stability diagnostics
//!   ([`least_squares`]);
//! - (weighted) square-root LASSO recovery with block row sparsity via a
//!   primal-dual solver ([`recovery`]);
//! - an experiment runner comparing sampling schemes over trial ladders
//!   ([`experiment`]).

pub mod basis;
pub mod domain;
pub mod experiment;
pub mod indices;
pub mod io;
pub mod least_squares;
pub mod ortho;
pub mod recovery;
pub mod rng;
pub mod sampling;

use std::fmt;

/// Complex scalar used uniformly for dictionary values and coefficients.
/// Real-valued bases (Legendre) live in the real subfield.
pub type C64 = nalgebra::Complex<f64>;

/// Dense complex matrix type used throughout.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense real matrix type (grids, point lists).
pub type RMatrix = nalgebra::DMatrix<f64>;

/// Errors produced by this crate.
#[derive(Debug)]
pub enum Error {
    /// A generated index set would exceed the configured cardinality cap.
    CardinalityCap { would_be: u128, cap: usize },
    /// A point, index, or matrix has the wrong dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// An operation requiring nonnegative multi-indices received signed ones.
    SignedEntries,
    /// Duplicate multi-index in a custom set.
    DuplicateIndex(String),
    /// Evaluation point outside the admissible interval.
    OutOfDomain { coord: f64 },
    /// A weight or data value is NaN or infinite.
    NonFinite(&'static str),
    /// Matrix columns are not orthonormal to the required tolerance.
    NotOrthonormal { deviation: f64 },
    /// Rejection sampler acceptance rate fell below the safety floor.
    RejectionFailure { proposals: u64, accepted: u64 },
    /// Numerical rank deficiency detected during orthogonalization.
    RankDeficient { column: usize },
    /// All candidate probabilities vanish (e.g. all-zero evaluation matrix).
    DegenerateMeasure(&'static str),
    /// Hierarchical sampling requires the sample count to be a multiple of
    /// the basis size.
    NotMultiple { m: usize, s: usize },
    /// Exact lower-set enumeration was requested outside its feasible regime.
    RegimeExceeded(String),
    /// Denominator of a relative error is zero.
    ZeroDenominator,
    /// A grid point sits on the cube boundary where the preconditioning
    /// weight vanishes.
    BoundaryWeight { point: usize },
    /// Malformed file or configuration.
    Parse(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::CardinalityCap { would_be, cap } => {
                write!(f, "index set of size {would_be} exceeds cap {cap}")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::SignedEntries => write!(f, "operation requires nonnegative multi-indices"),
            Error::DuplicateIndex(s) => write!(f, "duplicate multi-index {s}"),
            Error::OutOfDomain { coord } => {
                write!(f, "coordinate {coord} outside [-1,1] beyond tolerance")
            }
            Error::NonFinite(what) => write!(f, "non-finite {what}"),
            Error::NotOrthonormal { deviation } => {
                write!(f, "columns not orthonormal (max deviation {deviation:.3e})")
            }
            Error::RejectionFailure { proposals, accepted } => write!(
                f,
                "rejection sampling acceptance too low: {accepted}/{proposals}"
            ),
            Error::RankDeficient { column } => {
                write!(f, "numerical rank deficiency at column {column}")
            }
            Error::DegenerateMeasure(what) => write!(f, "degenerate measure: {what}"),
            Error::NotMultiple { m, s } => {
                write!(f, "hierarchical draw needs m divisible by s (m={m}, s={s})")
            }
            Error::RegimeExceeded(s) => write!(f, "{s}"),
            Error::ZeroDenominator => write!(f, "relative error denominator is zero"),
            Error::BoundaryWeight { point } => write!(
                f,
                "grid point {point} lies on the cube boundary; preconditioning weight vanishes"
            ),
            Error::Parse(s) => write!(f, "parse error: {s}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
