//! Command-line front end: index-set generation, constants reports,
//! single least-squares / ℓ¹ fits, and full experiment runs.

use clap::{Args, Parser, Subcommand};
use sparse_sampler::basis::{
    assemble_eval_matrix, BasisFamily, DictionarySpec, EvalMatrix, Scaling,
};
use sparse_sampler::domain::{mc_grid, DiscreteGrid, Domain};
use sparse_sampler::experiment::{
    eval_test_function, render_csv, run_experiment, ExperimentConfig, TestFunction,
};
use sparse_sampler::indices::{
    gen_hyperbolic_cross, gen_tensor_product, gen_total_degree, IndexOrdering, MultiIndexSet,
};
use sparse_sampler::least_squares::{assemble_ls, solve_ls, LsSolver};
use sparse_sampler::ortho::orthonormalize;
use sparse_sampler::recovery::{
    default_lambda, lower_set_weights, sr_lasso, SolverOptions, SrLassoProblem,
};
use sparse_sampler::rng::StreamKey;
use sparse_sampler::sampling::{
    constants_report, cs_optimal_plan, draw, ls_hierarchical_draw, ls_optimal_plan, mc_plan,
    preconditioned_plan, SampleSet, Scheme,
};
use sparse_sampler::{C64, CMatrix, Error};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "sparse-sampler", version, about = "Sparse approximation from optimal samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or validate a multi-index set (plain text format).
    Indexset(IndexsetArgs),
    /// Print the diagnostic constants report as JSON.
    Constants(ConstantsArgs),
    /// One weighted least-squares fit; writes coefficients + diagnostics.
    FitLs(FitArgs),
    /// One (weighted) SR-LASSO fit; writes coefficients + diagnostics.
    FitL1(FitL1Args),
    /// Full experiment: CSV of trial records plus a meta JSON.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct IndexsetArgs {
    /// Index family: tp | td | hc (ignored with --load).
    #[arg(long, default_value = "hc")]
    family: String,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    order: usize,
    /// Ordering: lex | td | md.
    #[arg(long, default_value = "td")]
    ordering: String,
    /// Expand to all sign patterns (trigonometric indices).
    #[arg(long)]
    signed: bool,
    /// Load and validate an existing file instead of generating.
    #[arg(long)]
    load: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DictionaryArgs {
    /// Basis family: legendre | fourier.
    #[arg(long, default_value = "legendre")]
    basis: String,
    /// Load the index set from a file (text format)...
    #[arg(long)]
    indexset: Option<PathBuf>,
    /// ...or generate: family tp | td | hc with --order.
    #[arg(long, default_value = "hc")]
    index_family: String,
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Domain: d1 | d2 | d3.
    #[arg(long, default_value = "d1")]
    domain: String,
    /// Grid size; defaults to 10·n.
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fit in the grid-orthogonalized basis (default: true for legendre).
    #[arg(long)]
    orthogonalize: Option<bool>,
    /// Dump the 1/√k-scaled evaluation matrix to this file.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    dict: DictionaryArgs,
    /// Plan whose weights feed the Nikolskii constant.
    #[arg(long, default_value = "opt-nonhier")]
    scheme: String,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    dict: DictionaryArgs,
    /// Target function: f1 | f2 | f3 | f4.
    #[arg(long, default_value = "f1")]
    function: String,
    /// Sampling scheme: mc | opt-nonhier | opt-hier | precond | cs-opt.
    #[arg(long, default_value = "opt-nonhier")]
    scheme: String,
    /// Number of samples.
    #[arg(long)]
    m: usize,
    /// Gaussian noise level added to the data.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Output prefix; writes <prefix>.coeff.bin and <prefix>.diag.json.
    #[arg(long)]
    out_prefix: Option<PathBuf>,
}

#[derive(Args)]
struct FitL1Args {
    #[command(flatten)]
    fit: FitArgs,
    /// Penalty parameter; default (15/26)/√s with the heuristic target s.
    #[arg(long)]
    lambda: Option<f64>,
    /// ℓ¹ weights: none | lower.
    #[arg(long, default_value = "none")]
    weights: String,
    #[arg(long, default_value_t = 4000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON file with the experiment configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Output name; files are <run-id>.csv and <run-id>.meta.json.
    #[arg(long)]
    run_id: Option<String>,
    /// Record wall-clock seconds in the CSV (breaks byte-identical reruns).
    #[arg(long)]
    timing: bool,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> sparse_sampler::Result<()> {
    match cli.command {
        Command::Indexset(args) => cmd_indexset(args),
        Command::Constants(args) => cmd_constants(args),
        Command::FitLs(args) => cmd_fit(args, None),
        Command::FitL1(args) => {
            let l1 = L1Options {
                lambda: args.lambda,
                lower_weights: match args.weights.as_str() {
                    "none" => false,
                    "lower" => true,
                    other => return Err(Error::Parse(format!("unknown weights '{other}'"))),
                },
                max_iters: args.max_iters,
                tol: args.tol,
            };
            cmd_fit(args.fit, Some(l1))
        }
        Command::Experiment(args) => cmd_experiment(args),
    }
}

fn generate_set(family: &str, dim: usize, order: usize) -> sparse_sampler::Result<MultiIndexSet> {
    match family {
        "tp" => gen_tensor_product(dim, order),
        "td" => gen_total_degree(dim, order),
        "hc" => gen_hyperbolic_cross(dim, order),
        other => Err(Error::Parse(format!("unknown index family '{other}'"))),
    }
}

fn cmd_indexset(args: IndexsetArgs) -> sparse_sampler::Result<()> {
    let set = match &args.load {
        Some(path) => {
            let file = std::fs::File::open(path)?;
            sparse_sampler::io::read_index_set(file)?
        }
        None => {
            let mut set = generate_set(&args.family, args.dim, args.order)?;
            if args.signed {
                set = set.signed_variant()?;
            }
            set.reorder(IndexOrdering::from_token(&args.ordering)?)
        }
    };
    match &args.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            sparse_sampler::io::write_index_set(&mut file, &set)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            sparse_sampler::io::write_index_set(&mut stdout, &set)?;
        }
    }
    Ok(())
}

struct Setup {
    grid: Arc<DiscreteGrid>,
    /// Raw dictionary on the grid, 1/√k scaling.
    b: EvalMatrix,
    /// Dictionary used for fitting (orthogonalized when requested).
    fit_spec: Arc<DictionarySpec>,
    /// On-grid values of the fit dictionary, 1/√k scaling.
    fit_ongrid: CMatrix,
    root: StreamKey,
}

fn build_setup(dict: &DictionaryArgs) -> sparse_sampler::Result<Setup> {
    let family = match dict.basis.as_str() {
        "legendre" => BasisFamily::TensorLegendre,
        "fourier" => BasisFamily::TensorFourier,
        other => return Err(Error::Parse(format!("unknown basis '{other}'"))),
    };
    let set = match &dict.indexset {
        Some(path) => {
            let file = std::fs::File::open(path)?;
            sparse_sampler::io::read_index_set(file)?
        }
        None => {
            let mut set = generate_set(&dict.index_family, dict.dim, dict.order)?
                .reorder(IndexOrdering::TotalDegree);
            if matches!(family, BasisFamily::TensorFourier) {
                set = set.signed_variant()?;
            }
            set
        }
    };
    let domain = match dict.domain.as_str() {
        "d1" => Domain::d1(dict.dim),
        "d2" => Domain::d2(dict.dim),
        "d3" => Domain::d3(dict.dim),
        other => return Err(Error::Parse(format!("unknown domain '{other}'"))),
    };
    let spec = Arc::new(DictionarySpec::new(family.clone(), dict.dim, set)?);
    let k = dict.grid_size.unwrap_or(10 * spec.len());
    let root = StreamKey::root(dict.seed);
    let grid = Arc::new(mc_grid(&domain, k, &root.tagged("grid"))?);
    let b = assemble_eval_matrix(&spec, &grid.points, Scaling::OneOverSqrtK, None)?;
    let orthogonalize =
        dict.orthogonalize.unwrap_or(matches!(family, BasisFamily::TensorLegendre));
    let (fit_spec, fit_ongrid) = if orthogonalize {
        let ortho = Arc::new(orthonormalize(&b, spec.clone(), grid.clone())?);
        let q = ortho.q().clone();
        let fit_spec = Arc::new(DictionarySpec::new(
            BasisFamily::GridOrthogonalized(ortho),
            dict.dim,
            spec.index_set().clone(),
        )?);
        (fit_spec, q)
    } else {
        (spec, b.values.clone())
    };
    if let Some(path) = &dict.dump_matrix {
        let mut file = std::fs::File::create(path)?;
        sparse_sampler::io::write_eval_matrix(&mut file, &b)?;
    }
    Ok(Setup { grid, b, fit_spec, fit_ongrid, root })
}

fn build_plan(
    setup: &Setup,
    scheme: Scheme,
) -> sparse_sampler::Result<sparse_sampler::sampling::SamplingPlan> {
    match scheme {
        Scheme::MonteCarlo => Ok(mc_plan(setup.grid.clone())),
        Scheme::LsOptimalNonhier | Scheme::LsOptimalHier => {
            ls_optimal_plan(&setup.fit_ongrid, setup.grid.clone(), Some(setup.fit_spec.clone()))
        }
        Scheme::CsOptimal => {
            let em =
                EvalMatrix { values: setup.fit_ongrid.clone(), scaling: Scaling::OneOverSqrtK };
            cs_optimal_plan(&em, setup.grid.clone(), Some(setup.fit_spec.clone()))
        }
        Scheme::Preconditioned => {
            preconditioned_plan(setup.grid.clone(), Some(setup.fit_spec.clone()))
        }
    }
}

fn cmd_constants(args: ConstantsArgs) -> sparse_sampler::Result<()> {
    let setup = build_setup(&args.dict)?;
    let scheme = Scheme::from_token(&args.scheme)?;
    let plan = build_plan(&setup, scheme)?;
    let report = constants_report(&setup.b, &setup.fit_ongrid, &plan)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(io_err)?);
    Ok(())
}

struct L1Options {
    lambda: Option<f64>,
    lower_weights: bool,
    max_iters: usize,
    tol: f64,
}

fn cmd_fit(args: FitArgs, l1: Option<L1Options>) -> sparse_sampler::Result<()> {
    let setup = build_setup(&args.dict)?;
    let scheme = Scheme::from_token(&args.scheme)?;
    let function = TestFunction::from_token(&args.function)?;
    let n = setup.fit_spec.len();

    // draw
    let samples: SampleSet = if scheme == Scheme::LsOptimalHier {
        let per = args.m.div_ceil(n).max(1);
        ls_hierarchical_draw(
            &setup.fit_ongrid,
            setup.grid.clone(),
            per * n,
            &setup.root.tagged("hier"),
        )?
    } else {
        let plan = build_plan(&setup, scheme)?;
        draw(&plan, args.m, &setup.root.tagged("draw"))
    };
    let m = samples.len();

    // values
    let mut values = CMatrix::zeros(m, 1);
    for i in 0..m {
        let v = eval_test_function(&function, &samples.point(i))?;
        values[(i, 0)] = C64::new(v, 0.0);
    }
    if args.noise_sigma > 0.0 {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = setup.root.tagged("noise").rng();
        for i in 0..m {
            let g: f64 = StandardNormal.sample(&mut rng);
            values[(i, 0)] += C64::new(args.noise_sigma * g, 0.0);
        }
    }

    let (a, v) = assemble_ls(&samples, &setup.fit_spec, &values)?;
    let (coefficients, diagnostics) = match &l1 {
        None => {
            let fit = solve_ls(&a, &v, LsSolver::ThinQr, None)?;
            let diag = serde_json::json!({
                "alpha_hat": fit.alpha_hat,
                "beta_hat": fit.beta_hat,
                "cond_bound": fit.cond_bound,
                "residual_norm": fit.residual_norm,
                "m": m,
                "n": n,
            });
            (fit.coefficients.entries, diag)
        }
        Some(opts) => {
            let lambda = opts.lambda.unwrap_or_else(|| {
                let s_hat =
                    ((m as f64 / (2.0 * (n.max(2) as f64).ln())).round() as usize).max(1);
                default_lambda(s_hat, 1.0)
            });
            let weights = if opts.lower_weights {
                // sup-norm weights under the plain grid measure
                lower_set_weights(&setup.fit_spec, &setup.grid, &mc_plan(setup.grid.clone()))?
            } else {
                vec![1.0; n]
            };
            let mut problem = SrLassoProblem::weighted(a, v, lambda, weights)?;
            problem.opts = SolverOptions {
                max_iters: opts.max_iters,
                tol: opts.tol,
                ..SolverOptions::default()
            };
            let result = sr_lasso(&problem)?;
            let diag = serde_json::json!({
                "objective": result.objective,
                "iterations": result.iterations,
                "converged": result.converged,
                "residual_norm": result.residual_norm,
                "lambda": lambda,
                "m": m,
                "n": n,
            });
            (result.coefficients.entries, diag)
        }
    };

    println!("{}", serde_json::to_string_pretty(&diagnostics).map_err(io_err)?);
    if let Some(prefix) = &args.out_prefix {
        let coeff_path = with_suffix(prefix, ".coeff.bin");
        let mut file = std::fs::File::create(coeff_path)?;
        sparse_sampler::io::write_cmatrix(&mut file, &coefficients, Scaling::Raw.tag())?;
        let diag_path = with_suffix(prefix, ".diag.json");
        std::fs::write(diag_path, serde_json::to_string_pretty(&diagnostics).map_err(io_err)?)?;
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> sparse_sampler::Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config: {e}")))?;
    if args.timing {
        cfg.timing = true;
    }
    let out = run_experiment(&cfg)?;
    let run_id = args.run_id.unwrap_or_else(|| format!("run-{}", cfg.seed));
    std::fs::create_dir_all(&args.out_dir)?;
    let csv_path = args.out_dir.join(format!("{run_id}.csv"));
    std::fs::write(&csv_path, render_csv(&out.records, cfg.timing))?;
    let meta_path = args.out_dir.join(format!("{run_id}.meta.json"));
    std::fs::write(&meta_path, serde_json::to_string_pretty(&out.meta).map_err(io_err)?)?;
    println!("{}", csv_path.display());
    println!("{}", meta_path.display());
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

fn io_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}
