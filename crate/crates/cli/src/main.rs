use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use log::{info, warn};
use serde_json::json;

use milp_acquire::experiment::{aggregate, append_raw_rows, build_instances, run_grid, write_aggregates, ExperimentConfig};
use milp_acquire::io::{self, append_csv, read_contexts, read_dataset, read_json, read_model, write_json, ReportRow};
use milp_acquire::loss::surrogate_loss;
use milp_acquire::search::run_strategy;
use milp_acquire::synth::{data_rng, generate_bundle, generate_ground_truth, truth_rng};
use milp_acquire::{evaluate, GenConfig, SearchConfig, Strategy};

const SEED_ENV: &str = "MILP_ACQUIRE_SEED";

#[derive(Parser)]
#[command(name = "milp-acquire", version, about = "Learn MILP models from contextual examples")]
struct Cli {
    /// Print solver and search progress.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate ground truths, training sets and test contexts.
    Generate {
        /// Generator config (JSON). Defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
        #[arg(long, default_value = "data")]
        out: PathBuf,
    },
    /// Learn a model from a dataset.
    Learn {
        #[arg(long)]
        dataset: PathBuf,
        /// Search config (JSON); command-line flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        strategy: Option<Strategy>,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write the full trace and the final loss breakdown as JSON.
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate a learned model against a ground truth.
    Eval {
        #[arg(long)]
        learned: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        contexts: PathBuf,
        /// CSV file the result row is appended to.
        #[arg(long, default_value = "eval.csv")]
        out: PathBuf,
        /// Labels copied into the CSV row.
        #[arg(long, default_value = "")]
        strategy: String,
        #[arg(long, default_value = "")]
        seed: String,
        #[arg(long, default_value = "")]
        cutoff: String,
    },
    /// Run the full generate, learn and evaluate grid.
    Benchmark {
        /// Experiment config (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// An error together with the process exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(err: E) -> Self {
        Self { code: 1, err: err.into() }
    }
}

fn invalid<E: Into<anyhow::Error>>(err: E) -> Failure {
    Failure { code: 2, err: err.into() }
}

trait InputResult<T> {
    fn input(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InputResult<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(invalid)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Generate { config, seed, out } => cmd_generate(config.as_deref(), seed, &out),
        Command::Learn {
            dataset,
            config,
            strategy,
            cutoff,
            seed,
            out,
            trace,
        } => cmd_learn(&dataset, config.as_deref(), strategy, cutoff, seed, &out, trace),
        Command::Eval {
            learned,
            truth,
            contexts,
            out,
            strategy,
            seed,
            cutoff,
        } => cmd_eval(&learned, &truth, &contexts, &out, ReportRow::labels(strategy, seed, cutoff)),
        Command::Benchmark { config, seed, jobs, out } => cmd_benchmark(config.as_deref(), seed, jobs, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, err }) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(code)
        }
    }
}

/// Joins the error chain, skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    match path {
        Some(p) => read_json(p).input(),
        None => Ok(T::default()),
    }
}

fn cmd_generate(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let mut cfg: GenConfig = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().input()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let mut bundles = Vec::new();
    for i in 0..cfg.num_models {
        let truth = generate_ground_truth(&cfg, &mut truth_rng(cfg.seed, i))?;
        let model_dir = PathBuf::from(format!("model_{i}"));
        let truth_path = model_dir.join("truth.json");
        write_json(&out.join(&truth_path), &truth)?;
        for j in 0..cfg.seeds_per_model {
            let (data, test) = generate_bundle(&truth, &cfg, &mut data_rng(cfg.seed, i, j))?;
            let seed_dir = model_dir.join(format!("seed_{j}"));
            let dataset_path = seed_dir.join("dataset.json");
            let contexts_path = seed_dir.join("test_contexts.json");
            write_json(&out.join(&dataset_path), &data)?;
            write_json(&out.join(&contexts_path), &test)?;
            bundles.push(json!({
                "model": i,
                "seed": j,
                "truth": truth_path,
                "dataset": dataset_path,
                "test_contexts": contexts_path,
                "examples": data.len(),
            }));
        }
        info!("model {i}: {} bundles written", cfg.seeds_per_model);
    }
    write_json(&out.join("manifest.json"), &json!({ "config": cfg, "bundles": bundles }))?;
    info!("{} bundles in {}", bundles.len(), out.display());
    Ok(())
}

fn cmd_learn(
    dataset: &Path,
    config: Option<&Path>,
    strategy: Option<Strategy>,
    cutoff: Option<f64>,
    seed: Option<u64>,
    out: &Path,
    with_trace: bool,
) -> Result<(), Failure> {
    let data = read_dataset(dataset).input()?;
    let mut cfg: SearchConfig = load_config(config)?;
    if let Some(s) = strategy {
        cfg.strategy = s;
    }
    if let Some(c) = cutoff {
        cfg.cutoff_seconds = c;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().input()?;

    let (best, trace) = run_strategy(&data, &cfg, &[])?;
    info!(
        "{}: {} iterations, 0-1 loss {:.4} -> {:.4}",
        cfg.strategy,
        trace.iterations.len(),
        trace.initial_zero_one,
        trace.best_zero_one
    );
    write_json(&out.join("learned.json"), &best)?;
    io::write_trace_csv(&out.join("trace.csv"), &trace)?;
    if with_trace {
        write_json(&out.join("trace.json"), &trace)?;
        write_json(&out.join("loss.json"), &surrogate_loss(&best, &data)?)?;
    }
    Ok(())
}

fn cmd_eval(learned: &Path, truth: &Path, contexts: &Path, out: &Path, mut row: ReportRow) -> Result<(), Failure> {
    let learned_model = read_model(learned).input()?;
    let truth_model = read_model(truth).input()?;
    let test = read_contexts(contexts).input()?;
    let report = evaluate(&learned_model, &truth_model, &test).input()?;
    row.fill(&report);
    append_csv(out, &[row])?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_benchmark(config: Option<&Path>, seed: Option<u64>, jobs: usize, out: Option<PathBuf>) -> Result<(), Failure> {
    let mut cfg: ExperimentConfig = load_config(config)?;
    if let Some(s) = seed {
        cfg.gen.seed = s;
        cfg.search.seed = s;
    }
    if let Some(dir) = out {
        cfg.out_dir = Some(dir);
    }
    cfg.validate().input()?;
    let out = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("benchmark"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_json(&out.join("config.json"), &cfg)?;

    let instances = build_instances(&cfg.gen)?;
    info!(
        "{} instances x {} strategies, cutoffs {:?}, {} jobs",
        instances.len(),
        cfg.strategies.len(),
        cfg.cutoffs,
        jobs
    );
    let raw_path = out.join("raw.csv");
    if raw_path.exists() {
        fs::remove_file(&raw_path).with_context(|| format!("removing {}", raw_path.display()))?;
    }
    let mut write_error = None;
    let rows = run_grid(&cfg, &instances, jobs, |row| {
        match &row.error {
            Some(e) => warn!("truth {} seed {} {} @{}s failed: {e}", row.truth, row.seed, row.strategy, row.cutoff),
            None => info!(
                "truth {} seed {} {} @{}s: recall {:.3} precision {:.3} infeasibility {:.3} regret {:.4}",
                row.truth, row.seed, row.strategy, row.cutoff, row.recall, row.precision, row.infeasibility, row.regret
            ),
        }
        if write_error.is_none() {
            write_error = append_raw_rows(&raw_path, std::slice::from_ref(row)).err();
        }
    })?;
    if let Some(e) = write_error {
        return Err(e.into());
    }
    let agg = aggregate(&rows, &cfg.strategies, &cfg.cutoffs);
    write_aggregates(&out, &agg)?;
    for a in &agg {
        info!(
            "{} @{}s ({} runs): recall {:.3}±{:.3} precision {:.3}±{:.3} infeasibility {:.3}±{:.3} regret {:.4}±{:.4}",
            a.strategy,
            a.cutoff,
            a.runs,
            a.recall_mean,
            a.recall_std,
            a.precision_mean,
            a.precision_std,
            a.infeasibility_mean,
            a.infeasibility_std,
            a.regret_mean,
            a.regret_std
        );
    }
    if !rows.is_empty() && rows.iter().all(|r| !r.is_ok()) {
        return Err(anyhow::anyhow!("all {} runs failed", rows.len()).into());
    }
    Ok(())
}
