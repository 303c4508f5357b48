//! Sampling domains inside `[-1,1]^d` and finite Monte Carlo grids.
//!
//! A [`DiscreteGrid`] of k points carries the uniform discrete measure
//! τ = (1/k) Σ δ_{z_i}; it serves both as quadrature for error reporting and
//! as the support of the discrete sampling measures.

use crate::rng::StreamKey;
use crate::{Error, RMatrix, Result};
use rand::Rng;
use std::fmt;
use std::sync::Arc;

/// Membership test callback for user-defined domains.
pub type MembershipFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A sampling domain D ⊆ [-1,1]^d with deterministic membership.
#[derive(Clone)]
pub enum Domain {
    /// D₁ = [-1,1]^d.
    Hypercube { dimension: usize },
    /// D₂ = { r ≤ |y|₂ ≤ 1 }, inner radius r (default 1/2).
    Annulus { dimension: usize, inner_radius: f64 },
    /// D₃ = { y ∈ [-1,1]^d : Σ y_k ≤ 1 }.
    HalfspaceCutCube { dimension: usize },
    /// Arbitrary predicate; must describe a subset of [-1,1]^d.
    Predicate { dimension: usize, member: MembershipFn },
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Hypercube { dimension } => write!(f, "Hypercube(d={dimension})"),
            Domain::Annulus { dimension, inner_radius } => {
                write!(f, "Annulus(d={dimension}, r={inner_radius})")
            }
            Domain::HalfspaceCutCube { dimension } => {
                write!(f, "HalfspaceCutCube(d={dimension})")
            }
            Domain::Predicate { dimension, .. } => write!(f, "Predicate(d={dimension})"),
        }
    }
}

impl Domain {
    pub fn d1(dimension: usize) -> Self {
        Domain::Hypercube { dimension }
    }

    pub fn d2(dimension: usize) -> Self {
        Domain::Annulus { dimension, inner_radius: 0.5 }
    }

    pub fn d3(dimension: usize) -> Self {
        Domain::HalfspaceCutCube { dimension }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Hypercube { dimension }
            | Domain::Annulus { dimension, .. }
            | Domain::HalfspaceCutCube { dimension }
            | Domain::Predicate { dimension, .. } => *dimension,
        }
    }

    /// Membership test. Boundaries are closed (≤ comparisons).
    pub fn contains(&self, y: &[f64]) -> Result<bool> {
        if y.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: y.len() });
        }
        Ok(match self {
            Domain::Hypercube { .. } => y.iter().all(|v| v.abs() <= 1.0),
            Domain::Annulus { inner_radius, .. } => {
                let norm_sq: f64 = y.iter().map(|v| v * v).sum();
                norm_sq >= inner_radius * inner_radius && norm_sq <= 1.0
            }
            Domain::HalfspaceCutCube { .. } => {
                y.iter().all(|v| v.abs() <= 1.0) && y.iter().sum::<f64>() <= 1.0
            }
            Domain::Predicate { member, .. } => member(y),
        })
    }
}

/// k points of D with the uniform discrete measure τ.
#[derive(Debug, Clone)]
pub struct DiscreteGrid {
    /// k×d array, one point per row.
    pub points: RMatrix,
    /// Stream identifier the grid was generated from.
    pub seed_info: u64,
}

impl DiscreteGrid {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dimension(&self) -> usize {
        self.points.ncols()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }
}

/// Abort rejection sampling when fewer than this fraction of 10^6 proposals
/// was accepted.
const MIN_ACCEPT_RATE: f64 = 1e-4;
const RATE_CHECK_PROPOSALS: u64 = 1_000_000;

/// Draw k points i.i.d. uniform on the domain by rejection from the uniform
/// measure on [-1,1]^d. Pure function of (domain, k, stream key).
pub fn mc_grid(domain: &Domain, k: usize, key: &StreamKey) -> Result<DiscreteGrid> {
    assert!(k >= 1);
    let d = domain.dimension();
    let mut rng = key.rng();
    let mut points = RMatrix::zeros(k, d);
    let mut accepted: u64 = 0;
    let mut proposals: u64 = 0;
    let mut candidate = vec![0.0f64; d];
    while (accepted as usize) < k {
        for c in candidate.iter_mut() {
            *c = 2.0 * rng.random::<f64>() - 1.0;
        }
        proposals += 1;
        if domain.contains(&candidate)? {
            for (j, c) in candidate.iter().enumerate() {
                points[(accepted as usize, j)] = *c;
            }
            accepted += 1;
        }
        if proposals >= RATE_CHECK_PROPOSALS && (accepted as f64) < MIN_ACCEPT_RATE * proposals as f64
        {
            return Err(Error::RejectionFailure { proposals, accepted });
        }
    }
    Ok(DiscreteGrid { points, seed_info: key.id() })
}

/// The uniform probability vector of τ: the constant 1/k.
pub fn uniform_probs(grid: &DiscreteGrid) -> Vec<f64> {
    vec![1.0 / grid.len() as f64; grid.len()]
}
