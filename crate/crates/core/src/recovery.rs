//! (Weighted) square-root LASSO with block row sparsity, solved by a
//! first-order primal-dual splitting.
//!
//! The program is
//!   min_Z  λ·Σ_ι v_ι ‖Z_ι‖₂  +  ‖AZ − V‖_F,
//! over Z ∈ C^{n×K}, where Z_ι are the coefficient rows. The data-fit term
//! is kept non-smooth (the square root of the quadratic), which makes the
//! theoretically optimal λ independent of the noise level. Its dual prox is
//! the projection onto the Frobenius unit ball; the primal prox is rowwise
//! block soft thresholding.

use crate::basis::{BasisFamily, DictionarySpec};
use crate::domain::DiscreteGrid;
use crate::indices;
use crate::least_squares::CoefficientBlock;
use crate::sampling::SamplingPlan;
use crate::{C64, CMatrix, Error, Result};

/// Solver options for the primal-dual iteration.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Relative tolerance for the stopping window.
    pub tol: f64,
    /// Override the primal step; default derived from the spectral norm.
    pub step_primal: Option<f64>,
    /// Override the dual step.
    pub step_dual: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iters: 4000, tol: 1e-8, step_primal: None, step_dual: None }
    }
}

/// One SR-LASSO instance.
#[derive(Debug, Clone)]
pub struct SrLassoProblem {
    /// m×n design matrix, scaled as (1/√m)(√w φ).
    pub a: CMatrix,
    /// m×K data block.
    pub v: CMatrix,
    /// Penalty parameter λ > 0.
    pub lambda: f64,
    /// Positive per-index weights; all ones for the unweighted program.
    pub weights: Vec<f64>,
    pub opts: SolverOptions,
}

impl SrLassoProblem {
    pub fn new(a: CMatrix, v: CMatrix, lambda: f64) -> Result<Self> {
        let n = a.ncols();
        Self::weighted(a, v, lambda, vec![1.0; n])
    }

    pub fn weighted(a: CMatrix, v: CMatrix, lambda: f64, weights: Vec<f64>) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::NonFinite("lambda"));
        }
        if v.nrows() != a.nrows() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: v.nrows() });
        }
        if weights.len() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.ncols(), got: weights.len() });
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::NonFinite("l1 weight"));
        }
        Ok(SrLassoProblem { a, v, lambda, weights, opts: SolverOptions::default() })
    }

    /// Objective λ·Σ v_ι‖z_ι‖₂ + ‖Az − V‖_F at a candidate point.
    pub fn objective(&self, z: &CMatrix) -> f64 {
        let mut penalty = 0.0;
        for i in 0..z.nrows() {
            let norm: f64 = z.row(i).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            penalty += self.weights[i] * norm;
        }
        self.lambda * penalty + (&self.a * z - &self.v).norm()
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub coefficients: CoefficientBlock,
    /// Objective value at the returned point.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// ‖AẐ − V‖_F at the returned point.
    pub residual_norm: f64,
}

/// Row·max(0, 1 − threshold/‖row‖₂); the zero row maps to zero.
pub fn block_soft_threshold(row: &[C64], threshold: f64) -> Vec<C64> {
    assert!(threshold >= 0.0);
    let norm: f64 = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm <= threshold {
        return vec![C64::new(0.0, 0.0); row.len()];
    }
    let scale = 1.0 - threshold / norm;
    row.iter().map(|c| c * C64::new(scale, 0.0)).collect()
}

/// The theoretically safe default λ = (15/26)·√a/√s, taking the
/// norm-equivalence constant α as one (the target of the sampling theorems).
pub fn default_lambda(s: usize, riesz_a: f64) -> f64 {
    assert!(s >= 1 && riesz_a > 0.0);
    15.0 / 26.0 * riesz_a.sqrt() / (s as f64).sqrt()
}

/// Spectral norm estimate by 30 power iterations on A*A.
fn spectral_norm_estimate(a: &CMatrix) -> f64 {
    let n = a.ncols();
    let mut x = nalgebra::DVector::<C64>::from_fn(n, |i, _| {
        C64::new(1.0 / (i as f64 + 1.0), 0.0)
    });
    let norm = x.norm();
    x /= C64::new(norm, 0.0);
    let mut estimate = 0.0;
    for _ in 0..30 {
        let ax = a * &x;
        estimate = ax.norm();
        if estimate == 0.0 {
            return 0.0;
        }
        let mut next = a.adjoint() * ax;
        let nn = next.norm();
        if nn == 0.0 {
            return 0.0;
        }
        next /= C64::new(nn, 0.0);
        x = next;
    }
    estimate
}

/// Solve the (weighted) SR-LASSO by primal-dual iterations.
///
/// Convergence is declared when the relative iterate change and the relative
/// objective change both stay below the tolerance over a 10-iteration
/// window; otherwise the best-objective iterate seen is returned with
/// `converged = false` after `max_iters`.
pub fn sr_lasso(problem: &SrLassoProblem) -> Result<RecoveryResult> {
    let (m, n) = (problem.a.nrows(), problem.a.ncols());
    let k_out = problem.v.ncols();
    let spectral = spectral_norm_estimate(&problem.a);
    // safety margin: power iteration approaches the norm from below
    let l_padded = (spectral * 1.01).max(f64::MIN_POSITIVE);
    let tau = problem.opts.step_primal.unwrap_or(1.0 / l_padded);
    let sigma = problem.opts.step_dual.unwrap_or(1.0 / l_padded);

    let mut z = CMatrix::zeros(n, k_out);
    let mut z_bar = z.clone();
    let mut dual = CMatrix::zeros(m, k_out);
    let mut best_z = z.clone();
    let mut best_obj = problem.objective(&z);
    let mut prev_obj = best_obj;
    let mut calm_iters = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    for iter in 0..problem.opts.max_iters {
        iterations = iter + 1;
        // dual ascent + projection onto the Frobenius unit ball
        dual += (&problem.a * &z_bar - &problem.v) * C64::new(sigma, 0.0);
        let dual_norm = dual.norm();
        if dual_norm > 1.0 {
            dual /= C64::new(dual_norm, 0.0);
        }
        // primal descent + rowwise block soft threshold
        let grad_step = &z - (problem.a.adjoint() * &dual) * C64::new(tau, 0.0);
        let mut z_new = grad_step;
        let mut iterate_change_sq = 0.0f64;
        for i in 0..n {
            let threshold = tau * problem.lambda * problem.weights[i];
            let row_norm_sq: f64 = z_new.row(i).iter().map(|c| c.norm_sqr()).sum();
            let row_norm = row_norm_sq.sqrt();
            let scale = if row_norm <= threshold { 0.0 } else { 1.0 - threshold / row_norm };
            for j in 0..k_out {
                let shrunk = z_new[(i, j)] * C64::new(scale, 0.0);
                let delta = shrunk - z[(i, j)];
                iterate_change_sq += delta.norm_sqr();
                z_new[(i, j)] = shrunk;
            }
        }
        // over-relaxation with weight one
        z_bar = &z_new * C64::new(2.0, 0.0) - &z;
        z = z_new;

        let obj = problem.objective(&z);
        if obj < best_obj {
            best_obj = obj;
            best_z.copy_from(&z);
        }
        let rel_change = iterate_change_sq.sqrt() / z.norm().max(1.0);
        let rel_obj = (obj - prev_obj).abs() / obj.abs().max(1.0);
        prev_obj = obj;
        if rel_change < problem.opts.tol && rel_obj < problem.opts.tol {
            calm_iters += 1;
            if calm_iters >= 10 {
                converged = true;
                break;
            }
        } else {
            calm_iters = 0;
        }
    }

    let residual_norm = (&problem.a * &best_z - &problem.v).norm();
    Ok(RecoveryResult {
        coefficients: CoefficientBlock::new(best_z),
        objective: best_obj,
        iterations,
        converged,
        residual_norm,
    })
}

/// Lower-set surrogate weights u_ι = max over the plan's support of
/// √(w(z_i))·|φ_ι(z_i)| (the discrete L∞ norm of √w·φ_ι under τ).
pub fn lower_set_weights(
    spec: &DictionarySpec,
    grid: &DiscreteGrid,
    plan: &SamplingPlan,
) -> Result<Vec<f64>> {
    if plan.probs.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: plan.probs.len() });
    }
    let n = spec.len();
    let mut out = vec![0.0f64; n];
    // fast path: orthogonalized dictionaries carry their on-grid values
    let ongrid = match spec.family() {
        BasisFamily::GridOrthogonalized(ortho)
            if std::ptr::eq::<DiscreteGrid>(&**ortho.grid(), grid) =>
        {
            Some(ortho.q().clone() * C64::new((grid.len() as f64).sqrt(), 0.0))
        }
        _ => None,
    };
    for i in 0..grid.len() {
        if plan.probs[i] <= 0.0 {
            continue;
        }
        let sqrt_w = plan.weights[i].sqrt();
        match &ongrid {
            Some(q_scaled) => {
                for j in 0..n {
                    out[j] = out[j].max(sqrt_w * q_scaled[(i, j)].norm());
                }
            }
            None => {
                let row = spec.eval_row(&grid.point(i))?;
                for j in 0..n {
                    out[j] = out[j].max(sqrt_w * row[j].norm());
                }
            }
        }
    }
    Ok(out)
}

/// Weighted cardinality Σ_ι v_ι² of a set, with `v` aligned to the set's
/// enumeration. The empty slice gives zero.
pub fn weighted_cardinality(v: &[f64]) -> f64 {
    v.iter().map(|w| w * w).sum()
}

/// k(s;w) = max{ |S|_v : |S| ≤ s, S lower } by exhaustive lower-set
/// enumeration. The weight of each multi-index is looked up in `universe`
/// (which must contain the hyperbolic cross of order s−1, the union of all
/// lower sets of size ≤ s). Outside d ≤ 3, s ≤ 10 the enumeration is
/// refused; use the bound k(s;w) ≤ θ²·s instead.
pub fn k_lower(s: usize, universe: &indices::MultiIndexSet, v: &[f64]) -> Result<f64> {
    let d = universe.dimension();
    if d > 3 || s > 10 {
        return Err(Error::RegimeExceeded(format!(
            "exact lower-set enumeration limited to d <= 3, s <= 10 (got d={d}, s={s}); \
             fall back to the bound k(s;w) <= theta^2 * s"
        )));
    }
    if v.len() != universe.len() {
        return Err(Error::DimensionMismatch { expected: universe.len(), got: v.len() });
    }
    let lookup: std::collections::HashMap<&[i64], usize> = universe
        .indices()
        .iter()
        .enumerate()
        .map(|(pos, idx)| (idx.entries(), pos))
        .collect();
    let mut best = 0.0f64;
    for set in indices::enumerate_lower_sets(d, s) {
        let mut total = 0.0;
        for member in &set {
            let pos = lookup.get(member.as_slice()).ok_or_else(|| {
                Error::Parse(format!(
                    "universe does not contain the lower-set member {member:?}; \
                     provide at least the hyperbolic cross of order {}",
                    s - 1
                ))
            })?;
            total += v[*pos] * v[*pos];
        }
        best = best.max(total);
    }
    Ok(best)
}
