use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_milp-acquire"));
    cmd.env_remove("MILP_ACQUIRE_SEED").env("RUST_LOG", "warn");
    cmd
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    if !out.status.success() {
        eprintln!("stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn small_gen_config(dir: &Path) -> PathBuf {
    let path = dir.join("gen.json");
    fs::write(
        &path,
        r#"{"n":3,"m":3,"num_contexts":12,"domain_box":[0,6],"num_models":2,"seeds_per_model":2,"num_test_contexts":5,"seed":3}"#,
    )
    .unwrap();
    path
}

fn read_tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn generate_writes_bundles_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_gen_config(dir.path());
    let a = dir.path().join("nested/missing/a");
    let b = dir.path().join("b");
    assert!(run(bin().args(["generate", "--config"]).arg(&cfg).arg("--out").arg(&a)).status.success());
    assert!(run(bin().args(["generate", "--config"]).arg(&cfg).arg("--out").arg(&b)).status.success());
    let tree = read_tree(&a);
    assert_eq!(tree, read_tree(&b));
    let datasets = tree.iter().filter(|(p, _)| p.ends_with("dataset.json")).count();
    assert_eq!(datasets, 4);
    assert!(a.join("model_1/seed_1/test_contexts.json").exists());
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["bundles"].as_array().unwrap().len(), 4);
}

#[test]
fn default_generate_config_counts_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    // Small contexts keep the run short; the grid shape comes from the defaults.
    let cfg = dir.path().join("gen.json");
    fs::write(&cfg, r#"{"num_contexts":2,"num_test_contexts":1}"#).unwrap();
    assert!(run(bin().args(["generate", "--config"]).arg(&cfg).arg("--out").arg(&out)).status.success());
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["bundles"].as_array().unwrap().len(), 25);
}

#[test]
fn seed_env_var_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_gen_config(dir.path());
    let plain = dir.path().join("plain");
    let env = dir.path().join("env");
    let flag = dir.path().join("flag");
    assert!(run(bin().args(["generate", "--config"]).arg(&cfg).arg("--out").arg(&plain)).status.success());
    assert!(run(
        bin()
            .env("MILP_ACQUIRE_SEED", "99")
            .args(["generate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&env)
    )
    .status
    .success());
    assert!(run(bin().args(["generate", "--seed", "99", "--config"]).arg(&cfg).arg("--out").arg(&flag)).status.success());
    assert_ne!(read_tree(&plain), read_tree(&env));
    assert_eq!(read_tree(&env), read_tree(&flag));
}

#[test]
fn invalid_generate_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gen.json");
    fs::write(&cfg, r#"{"n":0}"#).unwrap();
    let out = run(bin().args(["generate", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("x")));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn learn_on_toy_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin()
        .args(["learn", "--strategy", "missle", "--cutoff", "2", "--seed", "1", "--trace", "--dataset"])
        .arg(data("toy_dataset.json"))
        .arg("--out")
        .arg(dir.path()));
    assert!(out.status.success());
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iter,seconds,zero_one,surrogate,lambda,action"));
    assert!(lines.next().is_some(), "trace has no iterations");
    let learned: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("learned.json")).unwrap()).unwrap();
    assert!(learned["A"].is_array());
    assert!(dir.path().join("trace.json").exists());
    let loss: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("loss.json")).unwrap()).unwrap();
    assert!(loss["per_example"].is_array());
}

#[test]
fn learn_is_deterministic_with_an_iteration_cap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("search.json");
    fs::write(&cfg, r#"{"m":2,"max_iterations":20,"cutoff_seconds":60}"#).unwrap();
    let learn = |name: &str| {
        let out = dir.path().join(name);
        assert!(run(bin()
            .args(["learn", "--strategy", "sls", "--seed", "4", "--config"])
            .arg(&cfg)
            .arg("--dataset")
            .arg(data("toy_dataset.json"))
            .arg("--out")
            .arg(&out))
        .status
        .success());
        fs::read(out.join("learned.json")).unwrap()
    };
    assert_eq!(learn("a"), learn("b"));
}

#[test]
fn learn_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = run(bin()
        .args(["learn", "--strategy", "unknown", "--dataset"])
        .arg(data("toy_dataset.json"))
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(unknown.status.code(), Some(2));
    let missing = run(bin().args(["learn", "--dataset"]).arg(dir.path().join("nope.json")).arg("--out").arg(dir.path()));
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn learn_respects_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = run(bin()
        .args(["learn", "--strategy", "missle", "--cutoff", "1", "--dataset"])
        .arg(data("toy_dataset.json"))
        .arg("--out")
        .arg(dir.path()));
    let elapsed = start.elapsed().as_secs_f64();
    assert!(out.status.success());
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let seconds: Vec<f64> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let slowest = seconds
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(seconds.first().copied().unwrap_or(0.0), f64::max);
    // Process start-up and file output are included in the wall clock.
    assert!(elapsed <= 1.0 + slowest + 0.5, "{elapsed}s with slowest iteration {slowest}s");
}

#[test]
fn eval_appends_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("results.csv");
    for strategy in ["truth", "again"] {
        let out = run(bin()
            .args(["eval", "--strategy", strategy, "--seed", "0", "--cutoff", "0", "--learned"])
            .arg(data("toy_truth.json"))
            .arg("--truth")
            .arg(data("toy_truth.json"))
            .arg("--contexts")
            .arg(data("toy_test_contexts.json"))
            .arg("--out")
            .arg(&csv));
        assert!(out.status.success());
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["recall"], 1.0);
        assert_eq!(report["mean_regret"], 0.0);
    }
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "strategy,seed,cutoff,recall,precision,infeasibility,regret");
    assert_eq!(lines[1], "truth,0,0,1.0,1.0,0.0,0.0");

    let corrupt = dir.path().join("corrupt.json");
    fs::write(&corrupt, "{\"A\": [[1.0, 2.0]], \"b\": ").unwrap();
    let out = run(bin()
        .arg("eval")
        .arg("--learned")
        .arg(&corrupt)
        .arg("--truth")
        .arg(data("toy_truth.json"))
        .arg("--contexts")
        .arg(data("toy_test_contexts.json"))
        .arg("--out")
        .arg(&csv));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

#[test]
fn benchmark_grid_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.json");
    fs::write(
        &cfg,
        r#"{"gen":{"n":3,"m":3,"num_contexts":10,"domain_box":[0,6],"num_models":1,"seeds_per_model":2,"num_test_contexts":5,"seed":2},
            "search":{"m":3,"max_iterations":5},"cutoffs":[0.5,1.0],"strategies":["missle","sgd"]}"#,
    )
    .unwrap();
    let out = dir.path().join("bench");
    assert!(run(bin().args(["benchmark", "--jobs", "2", "--config"]).arg(&cfg).arg("--out").arg(&out)).status.success());
    let raw = fs::read_to_string(out.join("raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 1 + 8);
    assert!(raw.starts_with("truth,seed,strategy,cutoff,"));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);
    let agg: serde_json::Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(agg.as_array().unwrap().len(), 4);

    // Rerunning replaces the raw file rather than appending to it.
    assert!(run(bin().args(["benchmark", "--jobs", "1", "--config"]).arg(&cfg).arg("--out").arg(&out)).status.success());
    assert_eq!(fs::read_to_string(out.join("raw.csv")).unwrap().lines().count(), 1 + 8);
}

#[test]
fn benchmark_rejects_bad_cutoffs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.json");
    fs::write(&cfg, r#"{"cutoffs":[60,30]}"#).unwrap();
    let out = run(bin().args(["benchmark", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("b")));
    assert_eq!(out.status.code(), Some(2));
}
