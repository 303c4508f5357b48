//! Sampling plans over a discrete grid and their diagnostic constants.
//!
//! All measures are realized on the grid measure τ. A plan stores the
//! probability vector over grid points together with the weight function
//! w(z_i) = 1/(k·P(z_i)) on its support, so the reciprocal relation between
//! the sampling density and the weight holds exactly in the discrete sense.
//!
//! Plans:
//! - Monte Carlo: uniform over the grid, w ≡ 1;
//! - LS-optimal: P(z_i) ∝ Σ_j |Q_{ij}|², the normalized reciprocal
//!   Christoffel function of the fit subspace (nonhierarchical), plus a
//!   hierarchical per-column variant whose mixture equals the former;
//! - CS-optimal: P(z_i) ∝ max_j |B_{ij}|², the max-basis density minimizing
//!   the ℓ¹ sample-complexity constant;
//! - preconditioned: P ∝ 1/w with the arcsine product weight
//!   w(y) = Π (π/2)√(1-y_k²).

use crate::basis::{DictionarySpec, EvalMatrix, Scaling};
use crate::domain::DiscreteGrid;
use crate::rng::StreamKey;
use crate::{C64, CMatrix, Error, RMatrix, Result};
use rand::Rng;
use std::sync::Arc;

/// Which sampling construction produced a plan or sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    MonteCarlo,
    LsOptimalNonhier,
    LsOptimalHier,
    CsOptimal,
    Preconditioned,
}

impl Scheme {
    pub fn token(&self) -> &'static str {
        match self {
            Scheme::MonteCarlo => "mc",
            Scheme::LsOptimalNonhier => "opt-nonhier",
            Scheme::LsOptimalHier => "opt-hier",
            Scheme::CsOptimal => "cs-opt",
            Scheme::Preconditioned => "precond",
        }
    }

    pub fn from_token(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(Scheme::MonteCarlo),
            "opt-nonhier" => Ok(Scheme::LsOptimalNonhier),
            "opt-hier" => Ok(Scheme::LsOptimalHier),
            "cs-opt" => Ok(Scheme::CsOptimal),
            "precond" => Ok(Scheme::Preconditioned),
            other => Err(Error::Parse(format!("unknown scheme '{other}'"))),
        }
    }
}

/// A discrete sampling measure on a grid with its weight function.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub scheme: Scheme,
    /// Probability of each grid point; sums to one.
    pub probs: Vec<f64>,
    /// w(z_i) = 1/(k·probs_i) on the support; infinite sentinel off it.
    pub weights: Vec<f64>,
    pub grid: Arc<DiscreteGrid>,
    pub basis: Option<Arc<DictionarySpec>>,
    cumulative: Vec<f64>,
}

impl SamplingPlan {
    /// Build a plan from unnormalized point masses. Grid points with zero
    /// mass get probability zero and an infinite weight; they are never
    /// drawn.
    pub fn from_masses(
        scheme: Scheme,
        masses: Vec<f64>,
        grid: Arc<DiscreteGrid>,
        basis: Option<Arc<DictionarySpec>>,
    ) -> Result<Self> {
        let k = grid.len();
        if masses.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: masses.len() });
        }
        let mut total = 0.0;
        for &m in &masses {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::NonFinite("point mass"));
            }
            total += m;
        }
        if total <= 0.0 {
            return Err(Error::DegenerateMeasure("all point masses vanish"));
        }
        let probs: Vec<f64> = masses.iter().map(|m| m / total).collect();
        let weights: Vec<f64> = probs
            .iter()
            .map(|&p| if p > 0.0 { 1.0 / (k as f64 * p) } else { f64::INFINITY })
            .collect();
        let mut cumulative = Vec::with_capacity(k);
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(SamplingPlan { scheme, probs, weights, grid, basis, cumulative })
    }

    /// Index of the grid point selected by a uniform variate via the
    /// cumulative distribution (binary search).
    fn select(&self, u: f64) -> usize {
        let mut lo = 0usize;
        let mut hi = self.cumulative.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.cumulative[mid] <= u {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// m drawn points with their weights and provenance.
#[derive(Debug, Clone)]
pub struct SampleSet {
    /// m×d sample coordinates.
    pub points: RMatrix,
    /// w(y_i) for each sample.
    pub weights: Vec<f64>,
    /// Grid indices when the samples live on a grid.
    pub grid_indices: Option<Vec<usize>>,
    pub scheme: Scheme,
    /// Stream identifier the draw was generated from.
    pub stream_id: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }
}

/// Diagnostic constants of a dictionary/plan pair on a grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConstantsReport {
    /// θ² = Σ_i max_j |B_{ij}|² — the integrated squared max (CS-optimal).
    pub theta_sq: f64,
    /// Θ² = k·max_{i,j} |B_{ij}|² — the uniform squared max (Monte Carlo).
    #[serde(rename = "Theta_sq")]
    pub big_theta_sq: f64,
    /// (N(P_S,w))² = max_i w(z_i)·K(z_i) for the supplied plan.
    pub nikolskii_sq: f64,
    /// Riesz lower constant a = σ_min(B)².
    pub riesz_a: f64,
    /// Riesz upper constant b = σ_max(B)².
    pub riesz_b: f64,
}

const ORTHO_TOL: f64 = 1e-8;

fn check_orthonormal(q: &CMatrix) -> Result<()> {
    let gram = q.adjoint() * q;
    let n = gram.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - C64::new(expect, 0.0)).norm());
        }
    }
    if dev > ORTHO_TOL {
        return Err(Error::NotOrthonormal { deviation: dev });
    }
    Ok(())
}

/// Reciprocal Christoffel values of the τ-orthonormal column span on the
/// grid: K(z_i) = k·Σ_j |Q_{ij}|². Their grid mean equals s exactly.
pub fn christoffel_on_grid(q: &CMatrix) -> Result<Vec<f64>> {
    check_orthonormal(q)?;
    let k = q.nrows() as f64;
    Ok((0..q.nrows())
        .map(|i| k * (0..q.ncols()).map(|j| q[(i, j)].norm_sqr()).sum::<f64>())
        .collect())
}

/// Uniform Monte Carlo plan on the grid: probs 1/k, w ≡ 1.
pub fn mc_plan(grid: Arc<DiscreteGrid>) -> SamplingPlan {
    let k = grid.len();
    SamplingPlan::from_masses(Scheme::MonteCarlo, vec![1.0; k], grid, None)
        .expect("uniform masses are valid")
}

/// The LS-optimal (nonhierarchical) plan: P(z_i) = (1/s)·Σ_j |Q_{ij}|²,
/// w(z_i) = s/K(z_i). Its weighted Nikolskii constant is exactly √s.
pub fn ls_optimal_plan(
    q: &CMatrix,
    grid: Arc<DiscreteGrid>,
    basis: Option<Arc<DictionarySpec>>,
) -> Result<SamplingPlan> {
    check_orthonormal(q)?;
    let masses: Vec<f64> = (0..q.nrows())
        .map(|i| (0..q.ncols()).map(|j| q[(i, j)].norm_sqr()).sum::<f64>())
        .collect();
    SamplingPlan::from_masses(Scheme::LsOptimalNonhier, masses, grid, basis)
}

/// The CS-optimal plan from the 1/√k-scaled evaluation matrix:
/// P(z_i) ∝ max_j |B_{ij}|², w(z_i) = θ²/(k·max_j |B_{ij}|²).
pub fn cs_optimal_plan(
    b: &EvalMatrix,
    grid: Arc<DiscreteGrid>,
    basis: Option<Arc<DictionarySpec>>,
) -> Result<SamplingPlan> {
    if b.scaling != Scaling::OneOverSqrtK {
        return Err(Error::Parse("cs_optimal_plan expects the 1/sqrt(k) scaling".into()));
    }
    let masses: Vec<f64> = (0..b.values.nrows())
        .map(|i| {
            (0..b.values.ncols())
                .map(|j| b.values[(i, j)].norm_sqr())
                .fold(0.0f64, f64::max)
        })
        .collect();
    let mut plan = SamplingPlan::from_masses(Scheme::CsOptimal, masses, grid, basis)?;
    plan.scheme = Scheme::CsOptimal;
    Ok(plan)
}

/// The arcsine preconditioning weight w(y) = Π_k (π/2)·√(1-y_k²).
pub fn precond_weight(y: &[f64]) -> f64 {
    y.iter()
        .map(|&c| std::f64::consts::FRAC_PI_2 * (1.0 - c * c).max(0.0).sqrt())
        .product()
}

/// Preconditioned plan: P(z_i) ∝ 1/w(z_i) with the arcsine weight,
/// normalized over the grid. Errors if a grid point sits on the cube
/// boundary, where 1/w is infinite.
pub fn preconditioned_plan(
    grid: Arc<DiscreteGrid>,
    basis: Option<Arc<DictionarySpec>>,
) -> Result<SamplingPlan> {
    let mut masses = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let w = precond_weight(&grid.point(i));
        if w == 0.0 {
            return Err(Error::BoundaryWeight { point: i });
        }
        masses.push(1.0 / w);
    }
    SamplingPlan::from_masses(Scheme::Preconditioned, masses, grid, basis)
}

/// Draw m i.i.d. samples from a plan by inverse-CDF selection.
pub fn draw(plan: &SamplingPlan, m: usize, key: &StreamKey) -> SampleSet {
    assert!(m >= 1);
    let mut rng = key.rng();
    let d = plan.grid.dimension();
    let mut points = RMatrix::zeros(m, d);
    let mut weights = Vec::with_capacity(m);
    let mut ids = Vec::with_capacity(m);
    for row in 0..m {
        let i = plan.select(rng.random::<f64>());
        for j in 0..d {
            points[(row, j)] = plan.grid.points[(i, j)];
        }
        weights.push(plan.weights[i]);
        ids.push(i);
    }
    SampleSet {
        points,
        weights,
        grid_indices: Some(ids),
        scheme: plan.scheme,
        stream_id: key.id(),
    }
}

/// Exact continuous Monte Carlo draw, available where it is closed-form:
/// uniform on the hypercube [-1,1]^d (equivalently the torus for the
/// Fourier dictionary). Weights are identically one.
pub fn mc_continuous_hypercube(d: usize, m: usize, key: &StreamKey) -> SampleSet {
    let mut rng = key.rng();
    let mut points = RMatrix::zeros(m, d);
    for i in 0..m {
        for j in 0..d {
            points[(i, j)] = 2.0 * rng.random::<f64>() - 1.0;
        }
    }
    SampleSet {
        points,
        weights: vec![1.0; m],
        grid_indices: None,
        scheme: Scheme::MonteCarlo,
        stream_id: key.id(),
    }
}

/// Hierarchical LS-optimal draw: column j of Q receives m/s draws from the
/// density |υ_{ι_j}|² (on the grid: P(z_i) = |Q_{ij}|²), with weights from
/// the nonhierarchical plan. Streams are keyed per (column, draw index), so
/// appending draws for a basis grown by new trailing columns reuses all
/// earlier draws unchanged.
pub fn ls_hierarchical_draw(
    q: &CMatrix,
    grid: Arc<DiscreteGrid>,
    m: usize,
    key: &StreamKey,
) -> Result<SampleSet> {
    check_orthonormal(q)?;
    let s = q.ncols();
    if !m.is_multiple_of(s) {
        return Err(Error::NotMultiple { m, s });
    }
    let per_column = m / s;
    let k = grid.len();
    let christoffel = christoffel_on_grid(q)?;
    let d = grid.dimension();
    let mut points = RMatrix::zeros(m, d);
    let mut weights = Vec::with_capacity(m);
    let mut ids = Vec::with_capacity(m);
    for j in 0..s {
        // per-column cumulative distribution; columns are unit vectors
        let mut cumulative = Vec::with_capacity(k);
        let mut acc = 0.0;
        for i in 0..k {
            acc += q[(i, j)].norm_sqr();
            cumulative.push(acc);
        }
        let total = *cumulative.last().unwrap();
        for c in cumulative.iter_mut() {
            *c /= total;
        }
        *cumulative.last_mut().unwrap() = 1.0;
        for t in 0..per_column {
            let mut rng = key.child(j as u64).child(t as u64).rng();
            let u = rng.random::<f64>();
            let mut lo = 0usize;
            let mut hi = k - 1;
            while lo < hi {
                let mid = (lo + hi) / 2;
                if cumulative[mid] <= u {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            let row = j * per_column + t;
            for col in 0..d {
                points[(row, col)] = grid.points[(lo, col)];
            }
            weights.push(s as f64 / christoffel[lo]);
            ids.push(lo);
        }
    }
    Ok(SampleSet {
        points,
        weights,
        grid_indices: Some(ids),
        scheme: Scheme::LsOptimalHier,
        stream_id: key.id(),
    })
}

/// Closed-form Θ² for the tensor Legendre dictionary:
/// max_ι Π_k (2ι_k + 1), attained at y = (1,…,1).
pub fn legendre_big_theta_sq(spec: &DictionarySpec) -> f64 {
    spec.index_set()
        .indices()
        .iter()
        .map(|idx| idx.entries().iter().map(|&e| (2 * e.abs() + 1) as f64).product::<f64>())
        .fold(0.0f64, f64::max)
}

/// Grid θ² and Θ² of a 1/√k-scaled evaluation matrix.
pub fn grid_theta_constants(b: &CMatrix) -> (f64, f64) {
    let k = b.nrows() as f64;
    let mut theta_sq = 0.0;
    let mut global = 0.0f64;
    for i in 0..b.nrows() {
        let row_max =
            (0..b.ncols()).map(|j| b[(i, j)].norm_sqr()).fold(0.0f64, f64::max);
        theta_sq += row_max;
        global = global.max(row_max);
    }
    (theta_sq, k * global)
}

/// Full constants report for a dictionary (via its scaled evaluation matrix
/// B), its τ-orthonormalization Q, and a sampling plan.
pub fn constants_report(
    b: &EvalMatrix,
    q: &CMatrix,
    plan: &SamplingPlan,
) -> Result<ConstantsReport> {
    if b.scaling != Scaling::OneOverSqrtK {
        return Err(Error::Parse("constants_report expects the 1/sqrt(k) scaling".into()));
    }
    let (theta_sq, big_theta_sq) = grid_theta_constants(&b.values);
    let christoffel = christoffel_on_grid(q)?;
    let mut nikolskii_sq = 0.0f64;
    for (i, &kv) in christoffel.iter().enumerate() {
        let w = plan.weights[i];
        if w.is_finite() {
            nikolskii_sq = nikolskii_sq.max(w * kv);
        }
    }
    let (riesz_a, riesz_b) = crate::ortho::riesz_constants(&b.values);
    Ok(ConstantsReport { theta_sq, big_theta_sq, nikolskii_sq, riesz_a, riesz_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{assemble_eval_matrix, BasisFamily};
    use crate::domain::{mc_grid, Domain};
    use crate::indices::{gen_hyperbolic_cross, gen_tensor_product, IndexOrdering};
    use crate::ortho::build_ortho;
    use approx::assert_relative_eq;

    fn fourier_b_on_grid(k: usize, t: usize, seed: u64) -> (EvalMatrix, Arc<DiscreteGrid>) {
        let set = gen_tensor_product(1, t).unwrap().signed_variant().unwrap();
        let spec = Arc::new(DictionarySpec::new(BasisFamily::TensorFourier, 1, set).unwrap());
        let grid = Arc::new(
            mc_grid(&Domain::d1(1), k, &StreamKey::root(seed).tagged("grid")).unwrap(),
        );
        let b = assemble_eval_matrix(&spec, &grid.points, Scaling::OneOverSqrtK, None).unwrap();
        (b, grid)
    }

    fn legendre_q(d: usize, t: usize, k: usize, seed: u64) -> (CMatrix, Arc<DiscreteGrid>) {
        let set = gen_hyperbolic_cross(d, t).unwrap().reorder(IndexOrdering::TotalDegree);
        let spec = Arc::new(DictionarySpec::new(BasisFamily::TensorLegendre, d, set).unwrap());
        let grid = Arc::new(
            mc_grid(&Domain::d2(d), k, &StreamKey::root(seed).tagged("grid")).unwrap(),
        );
        let ortho = build_ortho(spec, grid.clone()).unwrap();
        (ortho.q().clone(), grid)
    }

    #[test]
    fn christoffel_mean_is_s() {
        let (q, _) = legendre_q(2, 5, 300, 3);
        let s = q.ncols() as f64;
        let k = q.nrows() as f64;
        let kv = christoffel_on_grid(&q).unwrap();
        let mean: f64 = kv.iter().sum::<f64>() / k;
        assert_relative_eq!(mean, s, epsilon = 1e-10);
    }

    #[test]
    fn christoffel_constant_basis() {
        // s = 1 with the constant function: K ≡ 1
        let k = 40;
        let q = CMatrix::from_element(k, 1, C64::new(1.0 / (k as f64).sqrt(), 0.0));
        let kv = christoffel_on_grid(&q).unwrap();
        for v in kv {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn christoffel_rejects_nonorthonormal() {
        let q = CMatrix::from_element(10, 2, C64::new(0.3, 0.0));
        assert!(matches!(christoffel_on_grid(&q), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn fourier_christoffel_is_constant_s() {
        // Fourier columns on the full equispaced grid: K ≡ s
        let k = 32usize;
        let set = gen_tensor_product(1, 4).unwrap().signed_variant().unwrap();
        let spec = Arc::new(DictionarySpec::new(BasisFamily::TensorFourier, 1, set).unwrap());
        let mut points = RMatrix::zeros(k, 1);
        for i in 0..k {
            points[(i, 0)] = i as f64 / k as f64;
        }
        let grid = Arc::new(DiscreteGrid { points, seed_info: 0 });
        let b = assemble_eval_matrix(&spec, &grid.points, Scaling::OneOverSqrtK, None).unwrap();
        let kv = christoffel_on_grid(&b.values).unwrap();
        let s = spec.len() as f64;
        for v in kv {
            assert_relative_eq!(v, s, epsilon = 1e-10);
        }
        // and the LS-optimal plan is uniform with unit weights
        let plan = ls_optimal_plan(&b.values, grid.clone(), None).unwrap();
        for (&p, &w) in plan.probs.iter().zip(&plan.weights) {
            assert_relative_eq!(p, 1.0 / k as f64, epsilon = 1e-12);
            assert_relative_eq!(w, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn plan_invariants() {
        let (q, grid) = legendre_q(2, 6, 400, 11);
        let s = q.ncols() as f64;
        let k = grid.len() as f64;
        let plan = ls_optimal_plan(&q, grid.clone(), None).unwrap();
        let total: f64 = plan.probs.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        // support reciprocal relation and optimal Nikolskii identity
        let kv = christoffel_on_grid(&q).unwrap();
        let mut max_wk = 0.0f64;
        let mut harmonic = 0.0f64;
        for i in 0..grid.len() {
            if plan.probs[i] > 0.0 {
                assert!((plan.probs[i] * k * plan.weights[i] - 1.0).abs() < 1e-10);
                max_wk = max_wk.max(plan.weights[i] * kv[i]);
                harmonic += 1.0 / plan.weights[i];
            }
        }
        assert_relative_eq!(max_wk, s, epsilon = 1e-9);
        assert_relative_eq!(harmonic / k, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn nikolskii_lower_bound_other_plans() {
        let (q, grid) = legendre_q(2, 6, 400, 13);
        let s = q.ncols() as f64;
        let kv = christoffel_on_grid(&q).unwrap();
        let nikolskii = |plan: &SamplingPlan| -> f64 {
            kv.iter()
                .enumerate()
                .filter(|(i, _)| plan.weights[*i].is_finite())
                .map(|(i, &v)| plan.weights[i] * v)
                .fold(0.0f64, f64::max)
        };
        let mc = mc_plan(grid.clone());
        let pre = preconditioned_plan(grid.clone(), None).unwrap();
        assert!(nikolskii(&mc) >= s - 1e-9);
        assert!(nikolskii(&pre) >= s - 1e-9);
    }

    #[test]
    fn cs_plan_fourier_uniform_theta_one() {
        let (b, grid) = fourier_b_on_grid(200, 5, 17);
        let plan = cs_optimal_plan(&b, grid.clone(), None).unwrap();
        let k = grid.len() as f64;
        for (&p, &w) in plan.probs.iter().zip(&plan.weights) {
            assert_relative_eq!(p, 1.0 / k, epsilon = 1e-12);
            assert_relative_eq!(w, 1.0, epsilon = 1e-12);
        }
        let (theta_sq, big_theta_sq) = grid_theta_constants(&b.values);
        assert_relative_eq!(theta_sq, 1.0, epsilon = 1e-12);
        assert_relative_eq!(big_theta_sq, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cs_plan_single_index_equals_ls_plan() {
        // n = 1: the max over one column is that column, so both plans agree
        let set = gen_tensor_product(1, 0).unwrap();
        let spec = Arc::new(DictionarySpec::new(BasisFamily::TensorLegendre, 1, set).unwrap());
        let grid = Arc::new(
            mc_grid(&Domain::d1(1), 60, &StreamKey::root(23).tagged("grid")).unwrap(),
        );
        let b = assemble_eval_matrix(&spec, &grid.points, Scaling::OneOverSqrtK, None).unwrap();
        let cs = cs_optimal_plan(&b, grid.clone(), None).unwrap();
        let ls = ls_optimal_plan(&b.values, grid, None).unwrap();
        for i in 0..cs.probs.len() {
            assert_relative_eq!(cs.probs[i], ls.probs[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn cs_plan_rejects_zero_matrix() {
        let grid = Arc::new(
            mc_grid(&Domain::d1(1), 10, &StreamKey::root(1).tagged("grid")).unwrap(),
        );
        let b = EvalMatrix { values: CMatrix::zeros(10, 2), scaling: Scaling::OneOverSqrtK };
        assert!(matches!(
            cs_optimal_plan(&b, grid, None),
            Err(Error::DegenerateMeasure(_))
        ));
    }

    #[test]
    fn precond_weight_examples() {
        assert_relative_eq!(precond_weight(&[0.0]), std::f64::consts::FRAC_PI_2);
        let grid = Arc::new(
            mc_grid(&Domain::d1(2), 500, &StreamKey::root(5).tagged("grid")).unwrap(),
        );
        let plan = preconditioned_plan(grid, None).unwrap();
        let total: f64 = plan.probs.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn precond_plan_rejects_boundary_points() {
        let mut points = RMatrix::zeros(3, 1);
        points[(0, 0)] = 0.2;
        points[(1, 0)] = 1.0; // on the cube boundary: w = 0 there
        points[(2, 0)] = -0.4;
        let grid = Arc::new(DiscreteGrid { points, seed_info: 0 });
        assert!(matches!(
            preconditioned_plan(grid, None),
            Err(Error::BoundaryWeight { point: 1 })
        ));
    }

    #[test]
    fn precond_raw_weight_is_normalized_in_the_continuum() {
        // (1/k) Σ 1/w(z_i) ≈ 1 by Monte Carlo integration of the arcsine density
        let grid = Arc::new(
            mc_grid(&Domain::d1(1), 100_000, &StreamKey::root(29).tagged("grid")).unwrap(),
        );
        let mean: f64 = (0..grid.len())
            .map(|i| 1.0 / precond_weight(&grid.point(i)))
            .sum::<f64>()
            / grid.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean 1/w = {mean}");
    }

    #[test]
    fn draw_degenerate_and_deterministic() {
        let grid = Arc::new(
            mc_grid(&Domain::d1(1), 8, &StreamKey::root(2).tagged("grid")).unwrap(),
        );
        let mut masses = vec![0.0; 8];
        masses[0] = 1.0;
        let plan = SamplingPlan::from_masses(Scheme::MonteCarlo, masses, grid, None).unwrap();
        let key = StreamKey::root(9).tagged("draw");
        let set = draw(&plan, 25, &key);
        assert!(set.grid_indices.as_ref().unwrap().iter().all(|&i| i == 0));
        let again = draw(&plan, 25, &key);
        assert_eq!(set.points, again.points);
        assert_eq!(set.grid_indices, again.grid_indices);
    }

    #[test]
    fn draw_frequencies_match_probs() {
        let grid = Arc::new(
            mc_grid(&Domain::d1(1), 5, &StreamKey::root(3).tagged("grid")).unwrap(),
        );
        let masses = vec![5.0, 1.0, 2.0, 1.5, 0.5];
        let plan =
            SamplingPlan::from_masses(Scheme::MonteCarlo, masses, grid, None).unwrap();
        let m = 100_000usize;
        let set = draw(&plan, m, &StreamKey::root(4).tagged("draw"));
        let mut counts = [0usize; 5];
        for &i in set.grid_indices.as_ref().unwrap() {
            counts[i] += 1;
        }
        for i in 0..5 {
            let p = plan.probs[i];
            let sigma = (p * (1.0 - p) / m as f64).sqrt();
            let freq = counts[i] as f64 / m as f64;
            assert!((freq - p).abs() < 3.0 * sigma + 1e-9, "point {i}: {freq} vs {p}");
        }
    }

    #[test]
    fn hierarchical_mixture_equals_nonhierarchical() {
        let (q, grid) = legendre_q(2, 5, 250, 19);
        let s = q.ncols();
        // the average of the per-column densities equals the plan density
        let plan = ls_optimal_plan(&q, grid, None).unwrap();
        for i in 0..plan.probs.len() {
            let mixture: f64 =
                (0..s).map(|j| q[(i, j)].norm_sqr()).sum::<f64>() / s as f64;
            assert_relative_eq!(mixture, plan.probs[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn hierarchical_requires_multiple() {
        let (q, grid) = legendre_q(2, 4, 150, 7);
        let s = q.ncols();
        let key = StreamKey::root(1).tagged("hier");
        assert!(matches!(
            ls_hierarchical_draw(&q, grid, s + 1, &key),
            Err(Error::NotMultiple { .. })
        ));
    }

    #[test]
    fn hierarchical_prefix_reuse() {
        let (q, grid) = legendre_q(2, 6, 300, 43);
        let s = q.ncols();
        let key = StreamKey::root(6).tagged("hier");
        let small = ls_hierarchical_draw(&q.columns(0, s - 2).into_owned(), grid.clone(), 3 * (s - 2), &key)
            .unwrap();
        let big = ls_hierarchical_draw(&q, grid, 3 * s, &key).unwrap();
        // draws for the shared leading columns are identical
        let small_ids = small.grid_indices.unwrap();
        let big_ids = big.grid_indices.unwrap();
        for j in 0..s - 2 {
            for t in 0..3 {
                assert_eq!(small_ids[j * 3 + t], big_ids[j * 3 + t]);
            }
        }
    }

    #[test]
    fn hierarchical_single_column_matches_nonhier_law() {
        // s = 1: per-column density equals the full Christoffel density
        let (q, grid) = legendre_q(1, 0, 50, 3);
        assert_eq!(q.ncols(), 1);
        let plan = ls_optimal_plan(&q, grid.clone(), None).unwrap();
        for i in 0..grid.len() {
            assert_relative_eq!(plan.probs[i], q[(i, 0)].norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn hierarchical_per_column_frequencies() {
        let (q, grid) = legendre_q(1, 3, 60, 53);
        let s = q.ncols();
        let per = 10_000usize;
        let set =
            ls_hierarchical_draw(&q, grid, per * s, &StreamKey::root(8).tagged("hier")).unwrap();
        let ids = set.grid_indices.unwrap();
        for j in 0..s {
            let mut counts = vec![0usize; 60];
            for t in 0..per {
                counts[ids[j * per + t]] += 1;
            }
            for i in 0..60 {
                let p = q[(i, j)].norm_sqr();
                let sigma = (p * (1.0 - p) / per as f64).sqrt();
                let freq = counts[i] as f64 / per as f64;
                assert!(
                    (freq - p).abs() <= 3.0 * sigma + 2e-3,
                    "col {j} point {i}: {freq} vs {p}"
                );
            }
        }
    }

    #[test]
    fn constants_report_legendre_tp_closed_form() {
        // Θ² = (2s+1)^d for the tensor-product set of order s
        for (d, s) in [(1usize, 3usize), (2, 2), (3, 1)] {
            let set = gen_tensor_product(d, s).unwrap();
            let spec =
                Arc::new(DictionarySpec::new(BasisFamily::TensorLegendre, d, set).unwrap());
            let closed = legendre_big_theta_sq(&spec);
            assert_relative_eq!(closed, ((2 * s + 1) as f64).powi(d as i32), epsilon = 1e-12);
        }
    }

    #[test]
    fn theta_le_big_theta_and_ge_riesz_a() {
        let (b, grid) = fourier_b_on_grid(150, 4, 37);
        let ortho = crate::ortho::orthonormalize(
            &b,
            Arc::new(
                DictionarySpec::new(
                    BasisFamily::TensorFourier,
                    1,
                    gen_tensor_product(1, 4).unwrap().signed_variant().unwrap(),
                )
                .unwrap(),
            ),
            grid.clone(),
        )
        .unwrap();
        let plan = mc_plan(grid);
        let report = constants_report(&b, ortho.q(), &plan).unwrap();
        assert!(report.theta_sq <= report.big_theta_sq + 1e-12);
        assert!(report.theta_sq >= report.riesz_a - 1e-12);
        assert!(report.riesz_a <= report.riesz_b);
    }

    #[test]
    fn one_d_legendre_unweighted_nikolskii_is_s_squared() {
        // S = {0,...,s-1}: (N(P_S, w≡1))² = Σ (2ι+1) = s², continuum value;
        // the grid value approaches it from below as the grid fills in
        let s = 6usize;
        let set = gen_tensor_product(1, s - 1).unwrap();
        let spec = Arc::new(DictionarySpec::new(BasisFamily::TensorLegendre, 1, set).unwrap());
        // include the endpoint by construction to make the sup exact
        let k = 2001;
        let mut points = RMatrix::zeros(k, 1);
        for i in 0..k {
            points[(i, 0)] = -1.0 + 2.0 * i as f64 / (k - 1) as f64;
        }
        let grid = Arc::new(DiscreteGrid { points, seed_info: 0 });
        let ortho = build_ortho(spec, grid.clone()).unwrap();
        let kv = christoffel_on_grid(ortho.q()).unwrap();
        let max_k = kv.iter().fold(0.0f64, |a, &b| a.max(b));
        // tau-orthonormalization wobbles the constant slightly on a finite grid
        assert!((max_k - (s * s) as f64).abs() < 0.5, "max K = {max_k}");
    }
}
