//! End-to-end experiment runner: build a grid, construct sampling plans,
//! draw samples over a trial ladder, fit (least squares or ℓ¹), and record
//! relative errors for plotting.
//!
//! Comparisons are paired: within one experiment every scheme shares the
//! same grid, while every (scheme, step, trial) triple draws from its own
//! random stream, so runs are reproducible byte for byte from the seed.

use crate::basis::{assemble_eval_matrix, BasisFamily, DictionarySpec, Scaling};
use crate::domain::{mc_grid, DiscreteGrid, Domain};
use crate::indices::{
    gen_hyperbolic_cross, gen_tensor_product, gen_total_degree, IndexOrdering, MultiIndexSet,
};
use crate::least_squares::{solve_ls, LsSolver};
use crate::recovery::{default_lambda, lower_set_weights, sr_lasso, SolverOptions, SrLassoProblem};
use crate::rng::StreamKey;
use crate::sampling::{
    cs_optimal_plan, draw, ls_hierarchical_draw, ls_optimal_plan, mc_plan, preconditioned_plan,
    SampleSet, SamplingPlan, Scheme,
};
use crate::{C64, CMatrix, Error, Result};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

/// User-supplied scalar target function.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Scalar test functions used throughout the experiments.
#[derive(Clone)]
pub enum TestFunction {
    F1,
    F2,
    F3,
    F4,
    /// User-supplied callback.
    UserFn(ScalarFn),
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::F1 => write!(f, "F1"),
            TestFunction::F2 => write!(f, "F2"),
            TestFunction::F3 => write!(f, "F3"),
            TestFunction::F4 => write!(f, "F4"),
            TestFunction::UserFn(_) => write!(f, "UserFn"),
        }
    }
}

impl TestFunction {
    pub fn from_token(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(TestFunction::F1),
            "f2" => Ok(TestFunction::F2),
            "f3" => Ok(TestFunction::F3),
            "f4" => Ok(TestFunction::F4),
            other => Err(Error::Parse(format!("unknown test function '{other}'"))),
        }
    }
}

/// Evaluate a test function at a point.
pub fn eval_test_function(f: &TestFunction, y: &[f64]) -> Result<f64> {
    let d = y.len();
    match f {
        TestFunction::F1 => {
            let mean = y.iter().sum::<f64>() / d as f64;
            Ok((-mean).exp())
        }
        TestFunction::F2 => {
            let half = d.div_ceil(2);
            let mut numerator = 1.0;
            for k in half + 1..=d {
                numerator *= (16.0 * y[k - 1] / 2f64.powi(k as i32)).cos();
            }
            let mut denominator = 1.0;
            for k in 1..=half {
                denominator *= 1.0 - y[k - 1] / 4f64.powi(k as i32);
            }
            Ok(numerator / denominator)
        }
        TestFunction::F3 => {
            let quarter = d as f64 / 4.0;
            let mut value = 1.0;
            for i in 1..=d {
                let shift = if i % 2 == 1 { 1.0 } else { -1.0 } / (i as f64 + 1.0);
                let term = y[i - 1] + shift;
                value *= quarter / (quarter + term * term);
            }
            Ok(value)
        }
        TestFunction::F4 => {
            let total: f64 = y.iter().map(|v| v.abs().sqrt()).sum();
            if total <= 0.0 {
                return Err(Error::ZeroDenominator);
            }
            Ok(1.0 / total)
        }
        TestFunction::UserFn(callback) => Ok(callback(y)),
    }
}

/// Relative L∞ error over the grid: max_i |f_i − f̂_i| / max_i |f_i|.
pub fn relative_linf_error(truth: &[C64], fitted: &[C64]) -> Result<f64> {
    if truth.len() != fitted.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: fitted.len() });
    }
    let denom = truth.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if denom <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let numer =
        truth.iter().zip(fitted).map(|(a, b)| (a - b).norm()).fold(0.0f64, f64::max);
    Ok(numer / denom)
}

/// Error floor applied before taking logs.
pub const LOG_FLOOR: f64 = 1e-16;

/// Geometric mean and multiplicative standard deviation of trial errors.
pub fn log_stats(errors: &[f64]) -> (f64, f64) {
    assert!(!errors.is_empty());
    let logs: Vec<f64> = errors.iter().map(|e| e.max(LOG_FLOOR).ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let std = if logs.len() > 1 {
        let var =
            logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (logs.len() - 1) as f64;
        var.sqrt()
    } else {
        0.0
    };
    (mean.exp(), std.exp())
}

/// How m is chosen at each ladder step.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MRule {
    /// m = max(s, ⌈s·ln s⌉) — natural log, m = s when s = 1.
    SLogS,
    /// Explicit list, one entry per ladder step.
    Explicit { values: Vec<usize> },
}

/// How the grid size k is chosen.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GridRule {
    /// k = 30·s_max (least-squares experiments).
    Ls,
    /// k = 10·n_max (ℓ¹ experiments).
    Cs,
    Explicit { k: usize },
}

/// Which solver the runner applies.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Ls,
    L1,
    L1Weighted,
}

fn default_trials() -> usize {
    50
}

/// Full description of one experiment run (JSON-serializable).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// "f1" | "f2" | "f3" | "f4".
    pub function: String,
    /// "d1" | "d2" | "d3".
    pub domain: String,
    pub dimension: usize,
    /// "legendre" | "fourier".
    pub basis: String,
    /// "tp" | "td" | "hc".
    pub index_family: String,
    /// Order parameter t per ladder step (a single entry is broadcast when
    /// the m-rule carries the ladder).
    pub order_ladder: Vec<usize>,
    /// Scheme tokens: "mc", "opt-nonhier", "opt-hier", "precond", "cs-opt".
    pub schemes: Vec<String>,
    #[serde(default)]
    pub m_rule: Option<MRule>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub grid_rule: Option<GridRule>,
    pub seed: u64,
    pub solver: SolverChoice,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub lambda_sparsity: Option<usize>,
    /// Fit in the grid-orthogonalized basis. Defaults to true for Legendre
    /// and false for Fourier (which is already orthonormal for ρ).
    #[serde(default)]
    pub orthogonalize: Option<bool>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Record wall-clock seconds in the CSV. Off by default: timings are
    /// nondeterministic and would break byte-identical reruns.
    #[serde(default)]
    pub timing: bool,
}

/// One CSV row.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub scheme: String,
    pub m: usize,
    pub s: usize,
    pub trial: usize,
    pub rel_err: f64,
    pub alpha_hat: f64,
    pub seconds: f64,
}

/// Records plus the metadata document.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub meta: serde_json::Value,
}

pub const CSV_HEADER: &str = "scheme,m,s,trial,rel_err,alpha_hat,seconds";

/// Render records as CSV text; `timing = false` zeroes the seconds column
/// so identical seeds reproduce identical bytes.
pub fn render_csv(records: &[TrialRecord], timing: bool) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let seconds = if timing { r.seconds } else { 0.0 };
        out.push_str(&format!(
            "{},{},{},{},{:.12e},{:.12e},{:.6e}\n",
            r.scheme, r.m, r.s, r.trial, r.rel_err, r.alpha_hat, seconds
        ));
    }
    out
}

fn parse_domain(token: &str, d: usize) -> Result<Domain> {
    match token {
        "d1" => Ok(Domain::d1(d)),
        "d2" => Ok(Domain::d2(d)),
        "d3" => Ok(Domain::d3(d)),
        other => Err(Error::Parse(format!("unknown domain '{other}'"))),
    }
}

fn gen_family(family: &str, d: usize, t: usize) -> Result<MultiIndexSet> {
    let set = match family {
        "tp" => gen_tensor_product(d, t)?,
        "td" => gen_total_degree(d, t)?,
        "hc" => gen_hyperbolic_cross(d, t)?,
        other => return Err(Error::Parse(format!("unknown index family '{other}'"))),
    };
    Ok(set.reorder(IndexOrdering::TotalDegree))
}

fn slogs(s: usize) -> usize {
    if s <= 1 {
        return 1.max(s);
    }
    let target = (s as f64 * (s as f64).ln()).ceil() as usize;
    target.max(s)
}

/// Basis used for fitting at one ladder step.
struct StepBasis {
    spec: Arc<DictionarySpec>,
    /// On-grid values of the fit basis, scaled 1/√k (columns τ-orthonormal
    /// when the basis is orthogonalized).
    ongrid: CMatrix,
}

/// Basis, plans and size for one distinct index set; shared by every ladder
/// step that reuses the set (m-ladders over a fixed dictionary).
struct StepBundle {
    set_size: usize,
    basis: StepBasis,
    plans: Vec<(Scheme, Option<SamplingPlan>)>,
}

struct Step {
    bundle: Arc<StepBundle>,
    m_target: usize,
}

fn build_step_basis(
    raw_spec: Arc<DictionarySpec>,
    grid: &Arc<DiscreteGrid>,
    orthogonalize: bool,
) -> Result<StepBasis> {
    let b = assemble_eval_matrix(&raw_spec, &grid.points, Scaling::OneOverSqrtK, None)?;
    if orthogonalize {
        let ortho = Arc::new(crate::ortho::orthonormalize(&b, raw_spec, grid.clone())?);
        let spec = Arc::new(DictionarySpec::new(
            BasisFamily::GridOrthogonalized(ortho.clone()),
            ortho.source().dimension(),
            ortho.source().index_set().clone(),
        )?);
        Ok(StepBasis { spec, ongrid: ortho.q().clone() })
    } else {
        Ok(StepBasis { spec: raw_spec, ongrid: b.values })
    }
}

fn build_plan(
    scheme: Scheme,
    basis: &StepBasis,
    grid: &Arc<DiscreteGrid>,
) -> Result<Option<SamplingPlan>> {
    let plan = match scheme {
        Scheme::MonteCarlo => Some(mc_plan(grid.clone())),
        Scheme::LsOptimalNonhier => {
            Some(ls_optimal_plan(&basis.ongrid, grid.clone(), Some(basis.spec.clone()))?)
        }
        // hierarchical draws bypass the plan; weights come from Q directly
        Scheme::LsOptimalHier => None,
        Scheme::CsOptimal => {
            let em = crate::basis::EvalMatrix {
                values: basis.ongrid.clone(),
                scaling: Scaling::OneOverSqrtK,
            };
            Some(cs_optimal_plan(&em, grid.clone(), Some(basis.spec.clone()))?)
        }
        Scheme::Preconditioned => {
            Some(preconditioned_plan(grid.clone(), Some(basis.spec.clone()))?)
        }
    };
    Ok(plan)
}

/// Target sparsity for the λ rule: configured, else a heuristic from the
/// sample budget, s = max(1, round(m / (2·ln n))).
fn lambda_target_sparsity(cfg: &ExperimentConfig, m: usize, n: usize) -> usize {
    cfg.lambda_sparsity
        .unwrap_or_else(|| ((m as f64 / (2.0 * (n.max(2) as f64).ln())).round() as usize).max(1))
}

/// λ for the unweighted program: explicit, else (15/26)/√s.
fn resolve_lambda(cfg: &ExperimentConfig, m: usize, n: usize) -> f64 {
    if let Some(l) = cfg.lambda {
        return l;
    }
    default_lambda(lambda_target_sparsity(cfg, m, n).max(1), 1.0)
}

/// λ for the weighted program: the sparsity in the rule is replaced by the
/// weighted surrogate k(s;u), enumerated exactly in the small regime and
/// bounded by θ²·s outside it.
fn resolve_weighted_lambda(
    cfg: &ExperimentConfig,
    m: usize,
    bundle: &StepBundle,
    weights: &[f64],
) -> f64 {
    if let Some(l) = cfg.lambda {
        return l;
    }
    let n = bundle.basis.spec.len();
    let s = lambda_target_sparsity(cfg, m, n).max(1);
    let k_eff = crate::recovery::k_lower(s, bundle.basis.spec.index_set(), weights)
        .unwrap_or_else(|_| {
            let (theta_sq, _) = crate::sampling::grid_theta_constants(&bundle.basis.ongrid);
            theta_sq * s as f64
        })
        .max(1.0);
    15.0 / 26.0 / k_eff.sqrt()
}

/// Run a full experiment. Any per-step failure aborts that step with a
/// message to stderr, not the whole run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let d = cfg.dimension;
    let func = TestFunction::from_token(&cfg.function)?;
    let domain = parse_domain(&cfg.domain, d)?;
    let basis_family = match cfg.basis.as_str() {
        "legendre" => BasisFamily::TensorLegendre,
        "fourier" => BasisFamily::TensorFourier,
        other => return Err(Error::Parse(format!("unknown basis '{other}'"))),
    };
    let orthogonalize =
        cfg.orthogonalize.unwrap_or(matches!(basis_family, BasisFamily::TensorLegendre));
    let schemes: Vec<Scheme> =
        cfg.schemes.iter().map(|s| Scheme::from_token(s)).collect::<Result<_>>()?;
    if schemes.is_empty() || cfg.order_ladder.is_empty() || cfg.trials == 0 {
        return Err(Error::Parse("ladder, schemes and trials must be nonempty".into()));
    }

    // resolve the (order, m) ladder
    let sets: Vec<MultiIndexSet> = cfg
        .order_ladder
        .iter()
        .map(|&t| {
            let set = gen_family(&cfg.index_family, d, t)?;
            let set = if matches!(basis_family, BasisFamily::TensorFourier) {
                set.signed_variant()?.reorder(IndexOrdering::TotalDegree)
            } else {
                set
            };
            Ok(set)
        })
        .collect::<Result<_>>()?;
    let n_max = sets.iter().map(|s| s.len()).max().unwrap();
    let m_rule = cfg.m_rule.clone().unwrap_or(match cfg.solver {
        SolverChoice::Ls => MRule::SLogS,
        // default geometric ladder 2^5..2^12 capped at the dictionary size
        _ => MRule::Explicit {
            values: {
                let mut values: Vec<usize> =
                    (5..=12).map(|p| 1usize << p).filter(|&m| m < n_max).collect();
                values.push(n_max);
                values.dedup();
                values
            },
        },
    });
    // each step references a distinct-set bundle so m-ladders over one
    // dictionary build the basis and plans once
    let (step_set_idx, step_ms): (Vec<usize>, Vec<usize>) = match &m_rule {
        MRule::SLogS => {
            let ms = sets.iter().map(|s| slogs(s.len())).collect();
            ((0..sets.len()).collect(), ms)
        }
        MRule::Explicit { values } => {
            if sets.len() == 1 {
                (vec![0; values.len()], values.clone())
            } else if sets.len() == values.len() {
                ((0..sets.len()).collect(), values.clone())
            } else {
                return Err(Error::Parse(
                    "explicit m list must have one entry per ladder step".into(),
                ));
            }
        }
    };

    let s_max = sets.iter().map(|s| s.len()).max().unwrap();
    let k = match cfg.grid_rule.clone().unwrap_or(match cfg.solver {
        SolverChoice::Ls => GridRule::Ls,
        _ => GridRule::Cs,
    }) {
        GridRule::Ls => 30 * s_max,
        GridRule::Cs => 10 * n_max,
        GridRule::Explicit { k } => k,
    };

    let root = StreamKey::root(cfg.seed);
    let grid = Arc::new(mc_grid(&domain, k, &root.tagged("grid"))?);
    let f_grid: Vec<C64> = (0..grid.len())
        .map(|i| eval_test_function(&func, &grid.point(i)).map(|v| C64::new(v, 0.0)))
        .collect::<Result<_>>()?;

    // one bundle per distinct index set, shared across ladder steps and
    // schemes; a failed bundle aborts its steps with a logged record only
    let mut bundles: Vec<Option<Arc<StepBundle>>> = Vec::with_capacity(sets.len());
    let mut meta_bases = Vec::new();
    for (bi, set) in sets.iter().enumerate() {
        let built = DictionarySpec::new(basis_family.clone(), d, set.clone())
            .map(Arc::new)
            .and_then(|raw_spec| build_step_basis(raw_spec, &grid, orthogonalize))
            .and_then(|basis| {
                let plans = schemes
                    .iter()
                    .map(|&scheme| Ok((scheme, build_plan(scheme, &basis, &grid)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(StepBundle { set_size: set.len(), basis, plans })
            });
        match built {
            Ok(bundle) => {
                let (theta_sq, big_theta_sq) =
                    crate::sampling::grid_theta_constants(&bundle.basis.ongrid);
                let (riesz_a, riesz_b) =
                    crate::ortho::riesz_constants(&bundle.basis.ongrid);
                // weighted Nikolskii constant of the optimal plan when the
                // fit basis is τ-orthonormal
                let nikolskii_sq = bundle
                    .plans
                    .iter()
                    .find(|(s, _)| *s == Scheme::LsOptimalNonhier)
                    .and_then(|(_, p)| p.as_ref())
                    .and_then(|plan| {
                        crate::sampling::christoffel_on_grid(&bundle.basis.ongrid).ok().map(
                            |kv| {
                                kv.iter()
                                    .zip(&plan.weights)
                                    .filter(|(_, w)| w.is_finite())
                                    .map(|(k, w)| k * w)
                                    .fold(0.0f64, f64::max)
                            },
                        )
                    });
                meta_bases.push(serde_json::json!({
                    "basis": bi,
                    "order": cfg.order_ladder[bi],
                    "n": bundle.set_size,
                    "theta_sq": theta_sq,
                    "Theta_sq": big_theta_sq,
                    "riesz_a": riesz_a,
                    "riesz_b": riesz_b,
                    "nikolskii_sq": nikolskii_sq,
                }));
                bundles.push(Some(Arc::new(bundle)));
            }
            Err(e) => {
                eprintln!("basis {bi} skipped: {e}");
                meta_bases.push(serde_json::json!({"basis": bi, "error": e.to_string()}));
                bundles.push(None);
            }
        }
    }
    let steps: Vec<Option<Step>> = step_set_idx
        .iter()
        .zip(&step_ms)
        .map(|(&bi, &m)| {
            bundles[bi].as_ref().map(|bundle| Step { bundle: bundle.clone(), m_target: m })
        })
        .collect();
    let meta_steps: Vec<serde_json::Value> = steps
        .iter()
        .enumerate()
        .map(|(si, step)| match step {
            Some(step) => serde_json::json!({
                "step": si,
                "basis": step_set_idx[si],
                "n": step.bundle.set_size,
                "m": step.m_target,
            }),
            None => serde_json::json!({"step": si, "error": "basis construction failed"}),
        })
        .collect();

    // records in (scheme, step, trial) order
    let mut records = Vec::new();
    for (scheme_pos, &scheme) in schemes.iter().enumerate() {
        for (si, step) in steps.iter().enumerate() {
            let Some(step) = step else { continue };
            for trial in 0..cfg.trials {
                let started = Instant::now();
                match run_trial(cfg, scheme, scheme_pos, si, trial, step, &grid, &f_grid, &root)
                {
                    Ok((m_actual, rel_err, alpha_hat)) => records.push(TrialRecord {
                        scheme: scheme.token().to_string(),
                        m: m_actual,
                        s: step.bundle.set_size,
                        trial,
                        rel_err,
                        alpha_hat,
                        seconds: started.elapsed().as_secs_f64(),
                    }),
                    Err(e) => {
                        eprintln!(
                            "trial failed (scheme={}, step={si}, trial={trial}): {e}",
                            scheme.token()
                        );
                    }
                }
            }
        }
    }

    let meta = serde_json::json!({
        "config": serde_json::to_value(cfg).map_err(|e| Error::Parse(e.to_string()))?,
        "grid_size": k,
        "grid_seed_info": grid.seed_info,
        "orthogonalized": orthogonalize,
        "m_rule_log_base": "natural",
        "bases": meta_bases,
        "steps": meta_steps,
        "environment": {
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
        },
    });
    Ok(ExperimentOutput { records, meta })
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    scheme_pos: usize,
    step_index: usize,
    trial: usize,
    step: &Step,
    grid: &Arc<DiscreteGrid>,
    f_grid: &[C64],
    root: &StreamKey,
) -> Result<(usize, f64, f64)> {
    let bundle = &*step.bundle;
    let n = bundle.basis.spec.len();
    let k = grid.len();
    let sqrt_k = (k as f64).sqrt();

    // draw samples
    let samples: SampleSet = match scheme {
        Scheme::LsOptimalHier => {
            // streams keyed per (trial, column, draw): nested across the ladder
            let per_column = step.m_target.div_ceil(n);
            let key = root.tagged("hier").child(scheme_pos as u64).child(trial as u64);
            ls_hierarchical_draw(&bundle.basis.ongrid, grid.clone(), per_column * n, &key)?
        }
        _ => {
            let plan = bundle
                .plans
                .iter()
                .find(|(s, _)| *s == scheme)
                .and_then(|(_, p)| p.as_ref())
                .ok_or(Error::Parse("plan missing for scheme".into()))?;
            let key = root
                .tagged("draw")
                .child(scheme_pos as u64)
                .child(step_index as u64)
                .child(trial as u64);
            draw(plan, step.m_target, &key)
        }
    };
    let m = samples.len();
    let ids = samples.grid_indices.as_ref().expect("grid draws carry indices");

    // values, with optional Gaussian noise
    let mut values = CMatrix::zeros(m, 1);
    for (i, &gi) in ids.iter().enumerate() {
        values[(i, 0)] = f_grid[gi];
    }
    if cfg.noise_sigma > 0.0 {
        let mut rng = root
            .tagged("noise")
            .child(scheme_pos as u64)
            .child(step_index as u64)
            .child(trial as u64)
            .rng();
        for i in 0..m {
            let g: f64 = StandardNormal.sample(&mut rng);
            values[(i, 0)] += C64::new(cfg.noise_sigma * g, 0.0);
        }
    }

    // design matrix in the fit basis, rows pulled from the on-grid values
    let inv_sqrt_m = 1.0 / (m as f64).sqrt();
    let mut a = CMatrix::zeros(m, n);
    for (i, &gi) in ids.iter().enumerate() {
        let factor = C64::new(samples.weights[i].sqrt() * inv_sqrt_m * sqrt_k, 0.0);
        for j in 0..n {
            a[(i, j)] = bundle.basis.ongrid[(gi, j)] * factor;
        }
    }
    let v = &values * C64::new(inv_sqrt_m, 0.0);
    let mut v_weighted = v.clone();
    for (i, &_gi) in ids.iter().enumerate() {
        v_weighted[(i, 0)] *= C64::new(samples.weights[i].sqrt(), 0.0);
    }

    let (coeffs, alpha_hat) = match cfg.solver {
        SolverChoice::Ls => {
            let fit = solve_ls(&a, &v_weighted, LsSolver::ThinQr, None)?;
            (fit.coefficients.entries, fit.alpha_hat)
        }
        SolverChoice::L1 | SolverChoice::L1Weighted => {
            let (weights, lambda) = if cfg.solver == SolverChoice::L1Weighted {
                // lower-set surrogate weights u_ι = ‖υ_ι‖_{L∞_τ}: sup norms
                // under the plain grid measure regardless of the sampling
                // scheme (they dominate the √w-weighted norms, so the
                // sufficient condition still holds); λ is rescaled by the
                // weighted sparsity surrogate
                let u = lower_set_weights(&bundle.basis.spec, grid, &mc_plan(grid.clone()))?;
                let lambda = resolve_weighted_lambda(cfg, m, bundle, &u);
                (u, lambda)
            } else {
                (vec![1.0; n], resolve_lambda(cfg, m, n))
            };
            let mut problem = SrLassoProblem::weighted(a, v_weighted, lambda, weights)?;
            problem.opts = SolverOptions {
                max_iters: cfg.max_iters.unwrap_or(4000),
                tol: cfg.tol.unwrap_or(1e-8),
                ..SolverOptions::default()
            };
            let result = sr_lasso(&problem)?;
            (result.coefficients.entries, 0.0)
        }
    };

    // fitted values on the grid and the error
    let fitted = (&bundle.basis.ongrid * &coeffs) * C64::new(sqrt_k, 0.0);
    let fitted_col: Vec<C64> = fitted.column(0).iter().copied().collect();
    let rel_err = relative_linf_error(f_grid, &fitted_col)?;
    Ok((m, rel_err, alpha_hat))
}
