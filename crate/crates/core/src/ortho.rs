//! Orthonormalization of a dictionary over the discrete grid measure τ.
//!
//! Given the scaled evaluation matrix B = (φ_{ι_j}(z_i)/√k) with QR
//! factorization B = QR, the functions
//! υ_{ι_i} = Σ_{j≤i} (R^{-T})_{ij} φ_{ι_j}
//! form a τ-orthonormal basis of the dictionary span, with on-grid values
//! υ_{ι_j}(z_i) = √k·Q_{ij}. The factorization depends on the column order,
//! so the ordering is part of the basis identity.

use crate::basis::{DictionarySpec, EvalMatrix, Scaling};
use crate::domain::DiscreteGrid;
use crate::indices::IndexOrdering;
use crate::{C64, CMatrix, Error, Result};
use std::sync::Arc;

/// A dictionary QR-orthogonalized over a discrete grid.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    q: CMatrix,
    r: CMatrix,
    source: Arc<DictionarySpec>,
    grid: Arc<DiscreteGrid>,
    ordering: IndexOrdering,
}

impl OrthoBasis {
    /// Orthonormal on-grid values, k×n; υ_{ι_j}(z_i) = √k·Q_{ij}.
    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    /// Upper-triangular factor with positive diagonal.
    pub fn r(&self) -> &CMatrix {
        &self.r
    }

    pub fn source(&self) -> &DictionarySpec {
        &self.source
    }

    pub fn grid(&self) -> &Arc<DiscreteGrid> {
        &self.grid
    }

    pub fn ordering(&self) -> IndexOrdering {
        self.ordering
    }

    pub fn len(&self) -> usize {
        self.r.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.r.nrows() == 0
    }

    /// The lower-triangular change of basis R^{-T}; row i expresses υ_{ι_i}
    /// in terms of φ_{ι_j}, j ≤ i. For large n prefer [`transform_raw`],
    /// which solves triangular systems instead.
    ///
    /// [`transform_raw`]: OrthoBasis::transform_raw
    pub fn r_inv_t(&self) -> CMatrix {
        let n = self.len();
        let mut out = CMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            e.fill(C64::new(0.0, 0.0));
            e[i] = C64::new(1.0, 0.0);
            let row = self.transform_raw(&e);
            // transform_raw solves R^T u = e_i; u is column i of R^{-T}
            for (j, v) in row.into_iter().enumerate() {
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Apply the change of basis to raw dictionary values at one point:
    /// solves R^T u = φ(y) by forward substitution (no conjugation).
    pub fn transform_raw(&self, phi_row: &[C64]) -> Vec<C64> {
        let n = self.len();
        assert_eq!(phi_row.len(), n);
        let mut u = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = phi_row[i];
            for j in 0..i {
                acc -= self.r[(j, i)] * u[j];
            }
            u[i] = acc / self.r[(i, i)];
        }
        u
    }

    /// Values of all υ functions at an arbitrary point of the domain.
    pub fn eval_offgrid(&self, y: &[f64]) -> Result<Vec<C64>> {
        let raw = self.source.eval_row(y)?;
        Ok(self.transform_raw(&raw))
    }

    /// Substitute a stored R factor (from an export) and rederive the
    /// on-grid values as Q = B·R⁻¹, keeping the exported factor bit-exact.
    pub(crate) fn with_factor(self, r: CMatrix, b_values: &CMatrix) -> Result<OrthoBasis> {
        let n = self.len();
        if r.nrows() != n || r.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: r.nrows() });
        }
        let k = b_values.nrows();
        let mut q = CMatrix::zeros(k, n);
        // column block solve: Q R = B, left to right
        for j in 0..n {
            for i in 0..k {
                let mut acc = b_values[(i, j)];
                for l in 0..j {
                    acc -= q[(i, l)] * r[(l, j)];
                }
                q[(i, j)] = acc / r[(j, j)];
            }
        }
        Ok(OrthoBasis { q, r, source: self.source, grid: self.grid, ordering: self.ordering })
    }

    /// The grid constants (θ², Θ²) of the orthonormalized basis:
    /// θ² = Σ_i max_j |Q_{ij}|², Θ² = k·max_{i,j} |Q_{ij}|².
    pub fn ortho_constants(&self) -> (f64, f64) {
        let k = self.q.nrows();
        let mut theta_sq = 0.0;
        let mut global_max = 0.0f64;
        for i in 0..k {
            let mut row_max = 0.0f64;
            for j in 0..self.q.ncols() {
                row_max = row_max.max(self.q[(i, j)].norm_sqr());
            }
            theta_sq += row_max;
            global_max = global_max.max(row_max);
        }
        (theta_sq, k as f64 * global_max)
    }
}

/// Thin QR of the 1/√k-scaled evaluation matrix, with the sign convention
/// that R has a positive diagonal (making the basis unique and reproducible).
///
/// Fails with the offending column index when the numerical rank falls below
/// n, detected via |R_ii| < k·ε·max|R_jj|.
pub fn orthonormalize(
    b: &EvalMatrix,
    source: Arc<DictionarySpec>,
    grid: Arc<DiscreteGrid>,
) -> Result<OrthoBasis> {
    if b.scaling != Scaling::OneOverSqrtK {
        return Err(Error::Parse("orthonormalize expects the 1/sqrt(k) scaling".into()));
    }
    let k = b.values.nrows();
    let n = b.values.ncols();
    if k < n {
        return Err(Error::DimensionMismatch { expected: n, got: k });
    }
    let qr = b.values.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    let max_diag = (0..n).map(|i| r[(i, i)].norm()).fold(0.0f64, f64::max);
    let floor = k as f64 * f64::EPSILON * max_diag;
    for i in 0..n {
        let d = r[(i, i)];
        if d.norm() <= floor {
            return Err(Error::RankDeficient { column: i });
        }
        let phase = d / C64::new(d.norm(), 0.0);
        // B = (Q·diag(phase))·(diag(conj phase)·R): positive-diagonal convention
        let conj_phase = phase.conj();
        for col in 0..n {
            r[(i, col)] *= conj_phase;
        }
        for row in 0..k {
            q[(row, i)] *= phase;
        }
    }
    let ordering = source.index_set().ordering();
    Ok(OrthoBasis { q, r, source, grid, ordering })
}

/// Assemble B on the grid and orthogonalize in one step.
pub fn build_ortho(spec: Arc<DictionarySpec>, grid: Arc<DiscreteGrid>) -> Result<OrthoBasis> {
    let b = crate::basis::assemble_eval_matrix(&spec, &grid.points, Scaling::OneOverSqrtK, None)?;
    orthonormalize(&b, spec, grid)
}

/// Optimal Riesz constants of the column system w.r.t. τ: the extreme squared
/// singular values (a, b) of the 1/√k-scaled evaluation matrix.
pub fn riesz_constants(values: &CMatrix) -> (f64, f64) {
    let svd = values.clone().svd(false, false);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for s in svd.singular_values.iter() {
        lo = lo.min(*s);
        hi = hi.max(*s);
    }
    if values.nrows() < values.ncols() {
        lo = 0.0; // rank cannot reach the column count
    }
    (lo * lo, hi * hi)
}
