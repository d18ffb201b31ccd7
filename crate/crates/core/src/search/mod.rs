//! Gradient-guided stochastic local search over MILP parameters, plus the
//! pure-gradient and pure-local-search baselines.
//!
//! All three strategies share initialization, the adaptive step size, the
//! cutoff and accuracy stop, and best-so-far tracking on the true 0-1 loss.
//! They differ only in how the next hypothesis is produced:
//!
//! * `missle`: three gradient moves (cost, rotation, translation), greedy
//!   selection on the 0-1 loss, random restarts.
//! * `sgd`: one joint gradient step on every parameter, no restarts.
//! * `sls`: three isotropic Gaussian moves of the same scale, greedy
//!   selection, random restarts.

pub mod candidate;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{evaluate_surrogate, Evaluation, Gradient};
use crate::model::{normalize_model, Dataset, MilpModel};

pub use candidate::{initial_candidate, random_unit, CandidateSampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Missle,
    Sgd,
    Sls,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Missle, Strategy::Sgd, Strategy::Sls];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Missle => "missle",
            Strategy::Sgd => "sgd",
            Strategy::Sls => "sls",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "missle" => Ok(Strategy::Missle),
            "sgd" => Ok(Strategy::Sgd),
            "sls" => Ok(Strategy::Sls),
            other => Err(Error::InvalidConfig(format!(
                "unknown strategy {other:?} (expected missle, sgd or sls)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Number of constraint rows in every hypothesis.
    pub m: usize,
    /// Restart probability per iteration.
    pub p: f64,
    pub cutoff_seconds: f64,
    /// Stop once training accuracy `1 - L_S` reaches this value.
    pub alpha: f64,
    pub seed: u64,
    pub strategy: Strategy,
    /// Optional iteration cap, for reproducible runs independent of the clock.
    pub max_iterations: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            m: 5,
            p: 0.05,
            cutoff_seconds: 60.0,
            alpha: 1.0,
            seed: 0,
            strategy: Strategy::Missle,
            max_iterations: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.m == 0 {
            return bad("m must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad("p must lie in [0, 1]");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if self.cutoff_seconds.is_nan() {
            return bad("cutoff_seconds must be a number");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Step,
    Restart,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Step => "step",
            Action::Restart => "restart",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub seconds: f64,
    /// 0-1 loss of the hypothesis after this iteration.
    pub zero_one: f64,
    pub surrogate: f64,
    pub lambda: f64,
    pub action: Action,
    pub best_zero_one: f64,
}

/// Best-so-far hypothesis at a wall-clock checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub seconds: f64,
    pub model: MilpModel,
    pub zero_one: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub strategy: Strategy,
    pub initial_zero_one: f64,
    pub iterations: Vec<TraceEntry>,
    pub best: MilpModel,
    pub best_zero_one: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<Snapshot>,
}

/// Step size for a hypothesis with 0-1 loss `zero_one`: large while the loss
/// is high, shrinking towards 0.05 as it reaches zero.
pub fn learning_rate(zero_one: f64) -> f64 {
    0.5 / (100.0 * (1.0 - zero_one)).max(1.0).sqrt()
}

/// The three gradient moves of `model`: cost, rotation, translation.
pub fn neighborhood(model: &MilpModel, data: &Dataset, lambda: f64) -> Result<Vec<MilpModel>> {
    let grad = evaluate_surrogate(model, data, true)?
        .gradient
        .expect("gradient requested");
    gradient_moves(model, &grad, lambda)
}

/// Applies one step of length `lambda` to each parameter block separately.
pub fn gradient_moves(model: &MilpModel, grad: &Gradient, lambda: f64) -> Result<Vec<MilpModel>> {
    let mut cost = model.clone();
    axpy(&mut cost.c, -lambda, &grad.d_c);
    let mut rotate = model.clone();
    for (row, g) in rotate.a.iter_mut().zip(&grad.d_a) {
        axpy(row, -lambda, g);
    }
    let mut translate = model.clone();
    axpy(&mut translate.b, -lambda, &grad.d_b);
    [cost, rotate, translate].iter().map(normalize_model).collect()
}

/// One joint gradient step on `c`, `A` and `b`.
pub fn joint_step(model: &MilpModel, grad: &Gradient, lambda: f64) -> Result<MilpModel> {
    let mut next = model.clone();
    axpy(&mut next.c, -lambda, &grad.d_c);
    for (row, g) in next.a.iter_mut().zip(&grad.d_a) {
        axpy(row, -lambda, g);
    }
    axpy(&mut next.b, -lambda, &grad.d_b);
    normalize_model(&next)
}

/// Three uninformed moves: isotropic Gaussian noise of scale `lambda` on
/// `c`, on `A`, and on `b` respectively.
pub fn random_moves<R: Rng + ?Sized>(model: &MilpModel, lambda: f64, rng: &mut R) -> Result<Vec<MilpModel>> {
    let mut noise = |v: &mut [f64]| {
        for x in v {
            *x += lambda * rng.sample::<f64, _>(StandardNormal);
        }
    };
    let mut cost = model.clone();
    noise(&mut cost.c);
    let mut rotate = model.clone();
    for row in &mut rotate.a {
        noise(row);
    }
    let mut translate = model.clone();
    noise(&mut translate.b);
    [cost, rotate, translate].iter().map(normalize_model).collect()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

struct Scored {
    model: MilpModel,
    eval: Evaluation,
}

impl Scored {
    fn new(model: MilpModel, data: &Dataset, with_gradient: bool) -> Result<Self> {
        let eval = evaluate_surrogate(&model, data, with_gradient)?;
        Ok(Self { model, eval })
    }

    fn gradient(&self) -> &Gradient {
        self.eval.gradient.as_ref().expect("evaluated with gradient")
    }
}

/// Picks the lowest 0-1 loss, then the lowest surrogate, then the earliest.
fn select(candidates: Vec<Scored>) -> Scored {
    let mut best: Option<Scored> = None;
    for cand in candidates {
        let better = match &best {
            None => true,
            Some(b) => {
                cand.eval.zero_one() < b.eval.zero_one()
                    || (cand.eval.zero_one() == b.eval.zero_one() && cand.eval.surrogate() < b.eval.surrogate())
            }
        };
        if better {
            best = Some(cand);
        }
    }
    best.expect("three candidates")
}

pub fn missle_search(data: &Dataset, cfg: &SearchConfig) -> Result<(MilpModel, SearchTrace)> {
    run_strategy(data, &SearchConfig { strategy: Strategy::Missle, ..cfg.clone() }, &[])
}

pub fn sgd_baseline(data: &Dataset, cfg: &SearchConfig) -> Result<(MilpModel, SearchTrace)> {
    run_strategy(data, &SearchConfig { strategy: Strategy::Sgd, ..cfg.clone() }, &[])
}

pub fn sls_baseline(data: &Dataset, cfg: &SearchConfig) -> Result<(MilpModel, SearchTrace)> {
    run_strategy(data, &SearchConfig { strategy: Strategy::Sls, ..cfg.clone() }, &[])
}

/// Runs the strategy named in `cfg`.
pub fn learn(data: &Dataset, cfg: &SearchConfig) -> Result<(MilpModel, SearchTrace)> {
    run_strategy(data, cfg, &[])
}

/// Runs `cfg.strategy`, additionally recording the best-so-far hypothesis
/// at each wall-clock checkpoint (seconds). A run that stops early fills the
/// remaining checkpoints with its final result, which is what a run with that
/// cutoff would have returned.
pub fn run_strategy(data: &Dataset, cfg: &SearchConfig, checkpoints: &[f64]) -> Result<(MilpModel, SearchTrace)> {
    cfg.validate()?;
    data.validate()?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sampler = CandidateSampler::new(data)?;
    let needs_gradient = cfg.strategy != Strategy::Sls;

    let mut current = Scored::new(sampler.sample(cfg.m, &mut rng)?, data, needs_gradient)?;
    let initial_zero_one = current.eval.zero_one();
    let mut best = current.model.clone();
    let mut best_zero_one = initial_zero_one;

    let mut pending: Vec<f64> = checkpoints.to_vec();
    pending.sort_by(f64::total_cmp);
    let mut pending = pending.into_iter().peekable();
    let mut snapshots = Vec::new();
    let mut iterations = Vec::new();

    loop {
        let elapsed = start.elapsed().as_secs_f64();
        while let Some(&t) = pending.peek() {
            if t > elapsed {
                break;
            }
            snapshots.push(Snapshot {
                seconds: t,
                model: best.clone(),
                zero_one: best_zero_one,
            });
            pending.next();
        }
        let accuracy = 1.0 - current.eval.zero_one();
        if !(elapsed < cfg.cutoff_seconds) || accuracy >= cfg.alpha {
            break;
        }
        if cfg.max_iterations.is_some_and(|cap| iterations.len() >= cap) {
            break;
        }

        let lambda = learning_rate(current.eval.zero_one());
        let action = match cfg.strategy {
            Strategy::Sgd => {
                let next = joint_step(&current.model, current.gradient(), lambda)?;
                current = Scored::new(next, data, true)?;
                Action::Step
            }
            Strategy::Missle | Strategy::Sls => {
                if rng.random::<f64>() < cfg.p {
                    current = Scored::new(sampler.sample(cfg.m, &mut rng)?, data, needs_gradient)?;
                    Action::Restart
                } else {
                    let moves = if cfg.strategy == Strategy::Missle {
                        gradient_moves(&current.model, current.gradient(), lambda)?
                    } else {
                        random_moves(&current.model, lambda, &mut rng)?
                    };
                    let scored = moves
                        .into_iter()
                        .map(|m| Scored::new(m, data, needs_gradient))
                        .collect::<Result<Vec<_>>>()?;
                    current = select(scored);
                    Action::Step
                }
            }
        };

        if current.eval.zero_one() < best_zero_one {
            best = current.model.clone();
            best_zero_one = current.eval.zero_one();
        }
        iterations.push(TraceEntry {
            iter: iterations.len() + 1,
            seconds: start.elapsed().as_secs_f64(),
            zero_one: current.eval.zero_one(),
            surrogate: current.eval.surrogate(),
            lambda,
            action,
            best_zero_one,
        });
    }
    for t in pending {
        snapshots.push(Snapshot {
            seconds: t,
            model: best.clone(),
            zero_one: best_zero_one,
        });
    }

    let trace = SearchTrace {
        strategy: cfg.strategy,
        initial_zero_one,
        iterations,
        best: best.clone(),
        best_zero_one,
        snapshots,
    };
    Ok((best, trace))
}
