//! Dictionary evaluation: tensor Legendre, tensor Fourier, and grid
//! orthogonalized bases, plus assembly of evaluation matrices on point lists.

use crate::indices::{MultiIndex, MultiIndexSet};
use crate::ortho::OrthoBasis;
use crate::{C64, CMatrix, Error, RMatrix, Result};
use std::sync::Arc;

/// Inputs within this distance outside [-1,1] are clamped; beyond it is a
/// domain error. Grid points on irregular domains may carry rounding error.
const CLAMP_TOL: f64 = 1e-12;

/// Entry scaling of an evaluation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// Entry (i,j) = φ_{ι_j}(y_i).
    Raw,
    /// Entry (i,j) = φ_{ι_j}(z_i)/√k; columns are unit vectors w.r.t. the
    /// discrete measure τ when the dictionary is τ-orthonormal.
    OneOverSqrtK,
    /// Entry (i,j) = √(w(y_i)/m)·φ_{ι_j}(y_i); the weighted design scaling.
    SqrtWOverSqrtM,
}

impl Scaling {
    pub fn tag(&self) -> u8 {
        match self {
            Scaling::Raw => 0,
            Scaling::OneOverSqrtK => 1,
            Scaling::SqrtWOverSqrtM => 2,
        }
    }

    pub fn from_tag(t: u8) -> Result<Self> {
        match t {
            0 => Ok(Scaling::Raw),
            1 => Ok(Scaling::OneOverSqrtK),
            2 => Ok(Scaling::SqrtWOverSqrtM),
            other => Err(Error::Parse(format!("unknown scaling tag {other}"))),
        }
    }
}

/// Dense k×n matrix of scaled dictionary values on a point list.
#[derive(Debug, Clone)]
pub struct EvalMatrix {
    pub values: CMatrix,
    pub scaling: Scaling,
}

/// Which dictionary family a spec evaluates.
#[derive(Debug, Clone)]
pub enum BasisFamily {
    TensorLegendre,
    TensorFourier,
    /// Basis orthogonalized over a discrete grid; evaluation applies the
    /// triangular change of basis to the source dictionary.
    GridOrthogonalized(Arc<OrthoBasis>),
}

/// A dictionary: family, ambient dimension, and the multi-index set.
#[derive(Debug, Clone)]
pub struct DictionarySpec {
    family: BasisFamily,
    dimension: usize,
    index_set: MultiIndexSet,
}

impl DictionarySpec {
    pub fn new(family: BasisFamily, dimension: usize, index_set: MultiIndexSet) -> Result<Self> {
        if index_set.dimension() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: index_set.dimension(),
            });
        }
        if matches!(family, BasisFamily::TensorLegendre) && index_set.has_signed_entries() {
            return Err(Error::SignedEntries);
        }
        Ok(DictionarySpec { family, dimension, index_set })
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    /// Values of all n dictionary functions at one point, in index order.
    pub fn eval_row(&self, y: &[f64]) -> Result<Vec<C64>> {
        if y.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: y.len() });
        }
        match &self.family {
            BasisFamily::TensorLegendre => legendre_row(&self.index_set, y),
            BasisFamily::TensorFourier => Ok(fourier_row(&self.index_set, y)),
            BasisFamily::GridOrthogonalized(ortho) => {
                let raw = ortho.source().eval_row(y)?;
                Ok(ortho.transform_raw(&raw))
            }
        }
    }
}

fn clamp_unit(y: f64) -> Result<f64> {
    if y.abs() <= 1.0 {
        Ok(y)
    } else if y.abs() <= 1.0 + CLAMP_TOL {
        Ok(y.clamp(-1.0, 1.0))
    } else {
        Err(Error::OutOfDomain { coord: y })
    }
}

/// Ladder of classical Legendre values P_0(y)..P_max(y) by the three-term
/// recurrence (n+1)P_{n+1} = (2n+1)yP_n - nP_{n-1}.
fn legendre_ladder(max_degree: usize, y: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(max_degree + 1);
    p.push(1.0);
    if max_degree >= 1 {
        p.push(y);
    }
    for n in 1..max_degree {
        let next = ((2 * n + 1) as f64 * y * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64;
        p.push(next);
    }
    p
}

/// Orthonormal Legendre value p_ι(y) = √(2ι+1) P_ι(y) with respect to the
/// uniform probability measure dy/2 on [-1,1].
pub fn legendre_1d(degree: usize, y: f64) -> Result<f64> {
    let y = clamp_unit(y)?;
    let ladder = legendre_ladder(degree, y);
    Ok(((2 * degree + 1) as f64).sqrt() * ladder[degree])
}

/// Tensor Legendre value φ_ι(y) = p_{ι₁}(y₁)···p_{ι_d}(y_d).
pub fn eval_tensor_legendre(index: &MultiIndex, y: &[f64]) -> Result<f64> {
    if index.dimension() != y.len() {
        return Err(Error::DimensionMismatch { expected: index.dimension(), got: y.len() });
    }
    let mut value = 1.0;
    for (e, &coord) in index.entries().iter().zip(y) {
        if *e < 0 {
            return Err(Error::SignedEntries);
        }
        value *= legendre_1d(*e as usize, coord)?;
    }
    Ok(value)
}

/// Tensor Fourier value φ_ι(y) = exp(2πi ι·y); unit modulus everywhere.
pub fn eval_tensor_fourier(index: &MultiIndex, y: &[f64]) -> Result<C64> {
    if index.dimension() != y.len() {
        return Err(Error::DimensionMismatch { expected: index.dimension(), got: y.len() });
    }
    let dot: f64 = index.entries().iter().zip(y).map(|(&e, &c)| e as f64 * c).sum();
    let angle = 2.0 * std::f64::consts::PI * dot;
    Ok(C64::new(angle.cos(), angle.sin()))
}

fn legendre_row(set: &MultiIndexSet, y: &[f64]) -> Result<Vec<C64>> {
    let d = set.dimension();
    // shared per-dimension ladders up to the set's max degree
    let mut max_deg = vec![0usize; d];
    for idx in set.indices() {
        for (k, &e) in idx.entries().iter().enumerate() {
            if e < 0 {
                return Err(Error::SignedEntries);
            }
            max_deg[k] = max_deg[k].max(e as usize);
        }
    }
    let mut ladders = Vec::with_capacity(d);
    for k in 0..d {
        let yk = clamp_unit(y[k])?;
        let ladder = legendre_ladder(max_deg[k], yk);
        let scaled: Vec<f64> = ladder
            .iter()
            .enumerate()
            .map(|(deg, v)| ((2 * deg + 1) as f64).sqrt() * v)
            .collect();
        ladders.push(scaled);
    }
    Ok(set
        .indices()
        .iter()
        .map(|idx| {
            let mut v = 1.0;
            for (k, &e) in idx.entries().iter().enumerate() {
                v *= ladders[k][e as usize];
            }
            C64::new(v, 0.0)
        })
        .collect())
}

fn fourier_row(set: &MultiIndexSet, y: &[f64]) -> Vec<C64> {
    set.indices()
        .iter()
        .map(|idx| {
            let dot: f64 = idx.entries().iter().zip(y).map(|(&e, &c)| e as f64 * c).sum();
            let angle = 2.0 * std::f64::consts::PI * dot;
            C64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// Assemble the scaled evaluation matrix on a point list (rows of `points`).
///
/// `weights` is required iff `scaling` is `SqrtWOverSqrtM` and must be
/// finite and positive.
pub fn assemble_eval_matrix(
    spec: &DictionarySpec,
    points: &RMatrix,
    scaling: Scaling,
    weights: Option<&[f64]>,
) -> Result<EvalMatrix> {
    let k = points.nrows();
    let n = spec.len();
    if points.ncols() != spec.dimension() {
        return Err(Error::DimensionMismatch { expected: spec.dimension(), got: points.ncols() });
    }
    let row_factors: Vec<f64> = match scaling {
        Scaling::Raw => vec![1.0; k],
        Scaling::OneOverSqrtK => vec![1.0 / (k as f64).sqrt(); k],
        Scaling::SqrtWOverSqrtM => {
            let w = weights.ok_or(Error::NonFinite("missing weights"))?;
            if w.len() != k {
                return Err(Error::DimensionMismatch { expected: k, got: w.len() });
            }
            let m = k as f64;
            let mut factors = Vec::with_capacity(k);
            for &wi in w {
                if !wi.is_finite() || wi <= 0.0 {
                    return Err(Error::NonFinite("weight"));
                }
                factors.push((wi / m).sqrt());
            }
            factors
        }
    };
    let mut values = CMatrix::zeros(k, n);
    let mut point = vec![0.0; spec.dimension()];
    for i in 0..k {
        for (j, p) in point.iter_mut().enumerate() {
            *p = points[(i, j)];
        }
        let row = spec.eval_row(&point)?;
        for (j, v) in row.into_iter().enumerate() {
            let scaled = v * C64::new(row_factors[i], 0.0);
            if !scaled.re.is_finite() || !scaled.im.is_finite() {
                return Err(Error::NonFinite("evaluation matrix entry"));
            }
            values[(i, j)] = scaled;
        }
    }
    Ok(EvalMatrix { values, scaling })
}
