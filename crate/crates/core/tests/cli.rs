//! End-to-end checks of the command-line interface and its file formats.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sparse-sampler")
}

fn run_ok(args: &[&str]) -> String {
    let out = Command::new(bin()).args(args).output().expect("spawn CLI");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

#[test]
fn indexset_generate_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.txt");
    run_ok(&[
        "indexset", "--family", "hc", "--dim", "2", "--order", "6", "--ordering", "td", "--out",
        path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("2 ") && header.contains(" td hc:6"), "header: {header}");
    // reload through the CLI validates ordering and duplicates
    let echoed = run_ok(&["indexset", "--load", path.to_str().unwrap()]);
    assert_eq!(echoed, text);

    // duplicates are rejected at load
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 2 lex custom\n4\n4\n").unwrap();
    let out = Command::new(bin())
        .args(["indexset", "--load", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));
}

#[test]
fn constants_json_keys() {
    let stdout = run_ok(&[
        "constants", "--basis", "legendre", "--index-family", "hc", "--order", "4", "--dim",
        "2", "--domain", "d2", "--seed", "11",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let obj = parsed.as_object().unwrap();
    for key in ["theta_sq", "Theta_sq", "nikolskii_sq", "riesz_a", "riesz_b"] {
        assert!(obj.contains_key(key), "missing key {key}");
    }
    // optimal plan: nikolskii_sq equals the subspace dimension
    let n = sparse_sampler::indices::gen_hyperbolic_cross(2, 4).unwrap().len();
    let nik = obj["nikolskii_sq"].as_f64().unwrap();
    assert!((nik - n as f64).abs() < 1e-9, "nikolskii {nik} vs s = {n}");
}

#[test]
fn fit_ls_outputs_and_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let dump = dir.path().join("matrix.bin");
    let stdout = run_ok(&[
        "fit-ls", "--function", "f1", "--basis", "legendre", "--index-family", "hc", "--order",
        "4", "--dim", "2", "--domain", "d2", "--scheme", "opt-nonhier", "--m", "60", "--seed",
        "5", "--out-prefix", prefix.to_str().unwrap(), "--dump-matrix", dump.to_str().unwrap(),
    ]);
    let diag: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    for key in ["alpha_hat", "beta_hat", "cond_bound", "residual_norm"] {
        assert!(diag.get(key).is_some(), "missing diagnostic {key}");
    }
    // coefficient file: n×1 complex matrix in the shared binary layout
    let mut f = std::fs::File::open(dir.path().join("run.coeff.bin")).unwrap();
    let (coeffs, _) = sparse_sampler::io::read_cmatrix(&mut f).unwrap();
    let n = sparse_sampler::indices::gen_hyperbolic_cross(2, 4).unwrap().len();
    assert_eq!((coeffs.nrows(), coeffs.ncols()), (n, 1));
    // dumped evaluation matrix: k×n with the 1/√k scaling tag
    let mut f = std::fs::File::open(&dump).unwrap();
    let em = sparse_sampler::io::read_eval_matrix(&mut f).unwrap();
    assert_eq!(em.values.ncols(), n);
    assert_eq!(em.values.nrows(), 10 * n);
    assert_eq!(em.scaling, sparse_sampler::basis::Scaling::OneOverSqrtK);
    assert!(std::fs::metadata(dir.path().join("run.diag.json")).unwrap().len() > 0);
}

#[test]
fn fit_l1_weighted_runs() {
    let stdout = run_ok(&[
        "fit-l1", "--function", "f1", "--basis", "legendre", "--index-family", "hc", "--order",
        "9", "--dim", "2", "--domain", "d2", "--scheme", "cs-opt", "--m", "50", "--seed", "3",
        "--weights", "lower", "--max-iters", "1500",
    ]);
    let diag: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(diag["lambda"].as_f64().unwrap() > 0.0);
    assert!(diag["residual_norm"].as_f64().unwrap() >= 0.0);
}

#[test]
fn experiment_outputs_csv_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "function": "f3",
        "domain": "d3",
        "dimension": 2,
        "basis": "legendre",
        "index_family": "td",
        "order_ladder": [2, 4],
        "schemes": ["mc", "precond"],
        "trials": 2,
        "seed": 7,
        "solver": "ls"
    });
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    run_ok(&[
        "experiment", "--config", cfg_path.to_str().unwrap(), "--out-dir",
        dir.path().to_str().unwrap(), "--run-id", "smoke",
    ]);
    let csv = std::fs::read_to_string(dir.path().join("smoke.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "scheme,m,s,trial,rel_err,alpha_hat,seconds");
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("smoke.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["config"]["seed"], 7);
    assert_eq!(meta["m_rule_log_base"], "natural");
    assert!(meta["steps"].as_array().unwrap().len() == 2);
}
