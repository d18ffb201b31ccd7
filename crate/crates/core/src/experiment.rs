//! Benchmark grid: ground truths × data seeds × strategies × cutoffs.
//!
//! Each `(truth, seed, strategy)` cell is searched once up to the largest
//! cutoff; the best-so-far hypothesis is snapshotted at every smaller cutoff
//! and evaluated as if the run had stopped there.

use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Mutex;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::io::{append_csv, write_json};
use crate::model::{Context, Dataset, MilpModel};
use crate::search::{run_strategy, SearchConfig, Strategy};
use crate::synth::{data_rng, generate_bundle, generate_ground_truth, stream_rng, truth_rng, GenConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub gen: GenConfig,
    pub search: SearchConfig,
    /// Wall-clock cutoffs in seconds, strictly increasing.
    pub cutoffs: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            gen: GenConfig::default(),
            search: SearchConfig::default(),
            cutoffs: vec![30.0, 60.0, 120.0],
            strategies: Strategy::ALL.to_vec(),
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.gen.validate()?;
        self.search.validate()?;
        if self.strategies.is_empty() {
            return Err(Error::InvalidConfig("at least one strategy is required".into()));
        }
        if self.cutoffs.is_empty() {
            return Err(Error::InvalidConfig("at least one cutoff is required".into()));
        }
        if self.cutoffs.iter().any(|c| !c.is_finite() || *c <= 0.0) {
            return Err(Error::InvalidConfig("cutoffs must be positive and finite".into()));
        }
        if self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("cutoffs must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn max_cutoff(&self) -> f64 {
        self.cutoffs.last().copied().unwrap_or(0.0)
    }
}

/// A generated ground truth together with one of its training sets.
#[derive(Debug, Clone)]
pub struct Instance {
    pub truth_index: usize,
    pub data_seed: usize,
    pub truth: MilpModel,
    pub data: Dataset,
    pub test_contexts: Vec<Context>,
}

/// Generates every `(truth, seed)` instance of the grid.
pub fn build_instances(cfg: &GenConfig) -> Result<Vec<Instance>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.num_models * cfg.seeds_per_model);
    for i in 0..cfg.num_models {
        let truth = generate_ground_truth(cfg, &mut truth_rng(cfg.seed, i))?;
        for j in 0..cfg.seeds_per_model {
            let (data, test_contexts) = generate_bundle(&truth, cfg, &mut data_rng(cfg.seed, i, j))?;
            out.push(Instance {
                truth_index: i,
                data_seed: j,
                truth: truth.clone(),
                data,
                test_contexts,
            });
        }
    }
    Ok(out)
}

/// Search seed for an instance, derived from the configured base seed.
pub fn search_seed(base: u64, truth_index: usize, data_seed: usize) -> u64 {
    stream_rng(base, ((truth_index as u64) << 32) | data_seed as u64).next_u64()
}

/// One `(truth, seed, strategy, cutoff)` result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub truth: usize,
    pub seed: usize,
    pub strategy: Strategy,
    pub cutoff: f64,
    pub train_zero_one: f64,
    pub recall: f64,
    pub precision: f64,
    pub infeasibility: f64,
    pub regret: f64,
    pub iterations: usize,
    pub error: Option<String>,
}

impl RunRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    fn failed(inst: &Instance, strategy: Strategy, cutoff: f64, err: &Error) -> Self {
        Self {
            truth: inst.truth_index,
            seed: inst.data_seed,
            strategy,
            cutoff,
            train_zero_one: f64::NAN,
            recall: f64::NAN,
            precision: f64::NAN,
            infeasibility: f64::NAN,
            regret: f64::NAN,
            iterations: 0,
            error: Some(err.to_string()),
        }
    }
}

/// Searches one instance with one strategy and evaluates every cutoff.
pub fn run_cell(cfg: &ExperimentConfig, inst: &Instance, strategy: Strategy) -> Vec<RunRow> {
    let search = SearchConfig {
        strategy,
        cutoff_seconds: cfg.max_cutoff(),
        seed: search_seed(cfg.search.seed, inst.truth_index, inst.data_seed),
        ..cfg.search.clone()
    };
    let trace = match run_strategy(&inst.data, &search, &cfg.cutoffs) {
        Ok((_, trace)) => trace,
        Err(e) => {
            return cfg
                .cutoffs
                .iter()
                .map(|&c| RunRow::failed(inst, strategy, c, &e))
                .collect()
        }
    };
    trace
        .snapshots
        .iter()
        .map(|snap| {
            let iterations = trace
                .iterations
                .iter()
                .take_while(|e| e.seconds <= snap.seconds)
                .count();
            match evaluate(&snap.model, &inst.truth, &inst.test_contexts) {
                Ok(r) => RunRow {
                    truth: inst.truth_index,
                    seed: inst.data_seed,
                    strategy,
                    cutoff: snap.seconds,
                    train_zero_one: snap.zero_one,
                    recall: r.recall,
                    precision: r.precision,
                    infeasibility: r.infeasibility,
                    regret: r.mean_regret,
                    iterations,
                    error: None,
                },
                Err(e) => RunRow::failed(inst, strategy, snap.seconds, &e),
            }
        })
        .collect()
}

/// Runs the grid on `jobs` worker threads. Rows are delivered to `sink` on
/// the calling thread as cells finish; the returned rows are sorted by
/// `(truth, seed, strategy, cutoff)`.
pub fn run_grid<F>(cfg: &ExperimentConfig, instances: &[Instance], jobs: usize, mut sink: F) -> Result<Vec<RunRow>>
where
    F: FnMut(&RunRow),
{
    cfg.validate()?;
    let cells: Vec<(usize, Strategy)> = (0..instances.len())
        .flat_map(|i| cfg.strategies.iter().map(move |&s| (i, s)))
        .collect();
    let queue = Mutex::new(cells.into_iter());
    let workers = jobs.max(1);
    let (tx, rx) = mpsc::channel::<Vec<RunRow>>();
    let mut rows = Vec::new();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let queue = &queue;
            scope.spawn(move || loop {
                let next = queue.lock().expect("queue lock").next();
                let Some((i, strategy)) = next else { break };
                if tx.send(run_cell(cfg, &instances[i], strategy)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for batch in rx {
            for row in &batch {
                sink(row);
            }
            rows.extend(batch);
        }
    });
    rows.sort_by(|a, b| {
        (a.truth, a.seed, a.strategy as u8)
            .cmp(&(b.truth, b.seed, b.strategy as u8))
            .then(a.cutoff.total_cmp(&b.cutoff))
    });
    Ok(rows)
}

/// Mean and sample standard deviation per `(strategy, cutoff)` over the
/// successful runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub strategy: Strategy,
    pub cutoff: f64,
    pub runs: usize,
    pub failed: usize,
    pub recall_mean: f64,
    pub recall_std: f64,
    pub precision_mean: f64,
    pub precision_std: f64,
    pub infeasibility_mean: f64,
    pub infeasibility_std: f64,
    pub regret_mean: f64,
    pub regret_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn aggregate(rows: &[RunRow], strategies: &[Strategy], cutoffs: &[f64]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for &strategy in strategies {
        for &cutoff in cutoffs {
            let cell: Vec<&RunRow> = rows
                .iter()
                .filter(|r| r.strategy == strategy && r.cutoff == cutoff)
                .collect();
            let ok: Vec<&RunRow> = cell.iter().copied().filter(|r| r.is_ok()).collect();
            let col = |f: fn(&RunRow) -> f64| mean_std(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (recall_mean, recall_std) = col(|r| r.recall);
            let (precision_mean, precision_std) = col(|r| r.precision);
            let (infeasibility_mean, infeasibility_std) = col(|r| r.infeasibility);
            let (regret_mean, regret_std) = col(|r| r.regret);
            out.push(AggregateRow {
                strategy,
                cutoff,
                runs: ok.len(),
                failed: cell.len() - ok.len(),
                recall_mean,
                recall_std,
                precision_mean,
                precision_std,
                infeasibility_mean,
                infeasibility_std,
                regret_mean,
                regret_std,
            });
        }
    }
    out
}

/// Flat CSV form of a [`RunRow`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawCsvRow {
    truth: usize,
    seed: usize,
    strategy: String,
    cutoff: f64,
    train_zero_one: f64,
    recall: f64,
    precision: f64,
    infeasibility: f64,
    regret: f64,
    iterations: usize,
    error: String,
}

impl From<&RunRow> for RawCsvRow {
    fn from(r: &RunRow) -> Self {
        Self {
            truth: r.truth,
            seed: r.seed,
            strategy: r.strategy.as_str().to_string(),
            cutoff: r.cutoff,
            train_zero_one: r.train_zero_one,
            recall: r.recall,
            precision: r.precision,
            infeasibility: r.infeasibility,
            regret: r.regret,
            iterations: r.iterations,
            error: r.error.clone().unwrap_or_default(),
        }
    }
}

pub fn append_raw_rows(path: &Path, rows: &[RunRow]) -> Result<()> {
    let flat: Vec<RawCsvRow> = rows.iter().map(RawCsvRow::from).collect();
    append_csv(path, &flat)
}

/// Writes `summary.csv` and `summary.json` into `dir`.
pub fn write_aggregates(dir: &Path, agg: &[AggregateRow]) -> Result<()> {
    let path = dir.join("summary.csv");
    if path.exists() {
        std::fs::remove_file(&path).map_err(|source| Error::Io { path: path.clone(), source })?;
    }
    append_csv(&path, agg)?;
    write_json(&dir.join("summary.json"), agg)
}
