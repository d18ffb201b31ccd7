//! Synthetic ground truths, contexts, and contextual examples.
//!
//! A ground truth is an all-integer MILP whose rows are random unit
//! half-spaces passing near a reference point in the central half of the
//! box. Contexts are random half-spaces whose offsets keep at least one
//! feasible lattice point. Each context contributes its optimum as a positive
//! and uniformly drawn non-optimal lattice points as negatives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::classify_against;
use crate::model::{dot, normalize_model, Bounds, Context, ContextualExample, Dataset, MilpModel};
use crate::search::random_unit;
use crate::solver::{enumerate_optimum, integer_range, is_feasible, lattice_points, solve_milp};

const TRUTH_ATTEMPTS: usize = 100;
const MIN_FEASIBLE_POINTS: usize = 50;
const CONTEXT_ATTEMPTS: usize = 50;
const OFFSET_SAMPLE: usize = 200;
const NEGATIVE_DRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub n: usize,
    pub m: usize,
    pub num_contexts: usize,
    pub pos_per_context: usize,
    pub neg_per_context: usize,
    pub num_models: usize,
    pub seeds_per_model: usize,
    /// Interval applied to every variable.
    pub domain_box: Bounds,
    pub context_rows: usize,
    pub num_test_contexts: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            n: 5,
            m: 5,
            num_contexts: 250,
            pos_per_context: 1,
            neg_per_context: 2,
            num_models: 5,
            seeds_per_model: 5,
            domain_box: (0.0, 10.0),
            context_rows: 1,
            num_test_contexts: 100,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n", self.n),
            ("m", self.m),
            ("num_contexts", self.num_contexts),
            ("pos_per_context", self.pos_per_context),
            ("num_models", self.num_models),
            ("seeds_per_model", self.seeds_per_model),
            ("context_rows", self.context_rows),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive")));
        }
        let (lo, hi) = self.domain_box;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig("domain_box must be finite with lo < hi".into()));
        }
        Ok(())
    }

    pub fn box_bounds(&self) -> Vec<Bounds> {
        vec![self.domain_box; self.n]
    }
}

/// Independent, reproducible RNG stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// RNG for ground truth number `model`.
pub fn truth_rng(seed: u64, model: usize) -> ChaCha8Rng {
    stream_rng(seed, (model as u64) << 32)
}

/// RNG for data set `data_seed` of ground truth number `model`.
pub fn data_rng(seed: u64, model: usize, data_seed: usize) -> ChaCha8Rng {
    stream_rng(seed, ((model as u64) << 32) | (data_seed as u64 + 1))
}

/// Samples a certified all-integer ground truth.
pub fn generate_ground_truth<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Result<MilpModel> {
    cfg.validate()?;
    let (lo, hi) = cfg.domain_box;
    let width = hi - lo;
    for _ in 0..TRUTH_ATTEMPTS {
        let z: Vec<f64> = (0..cfg.n)
            .map(|_| lo + width * (0.25 + 0.5 * rng.random::<f64>()))
            .collect();
        let mut a = Vec::with_capacity(cfg.m);
        let mut b = Vec::with_capacity(cfg.m);
        for _ in 0..cfg.m {
            let row = random_unit(cfg.n, rng);
            b.push(dot(&row, &z) + rng.random_range(0.5..2.0));
            a.push(row);
        }
        let c = random_unit(cfg.n, rng);
        let model = normalize_model(&MilpModel::new(a, b, c, vec![true; cfg.n], cfg.box_bounds()))?;
        if feasible_lattice_points(&model)?.len() < MIN_FEASIBLE_POINTS {
            continue;
        }
        if solve_milp(&model, &Context::empty())?.is_optimal() {
            return Ok(model);
        }
    }
    Err(Error::Generator(format!(
        "no ground truth with at least {MIN_FEASIBLE_POINTS} feasible points in {TRUTH_ATTEMPTS} attempts"
    )))
}

/// Every lattice point of the box feasible for `model` (empty context).
pub fn feasible_lattice_points(model: &MilpModel) -> Result<Vec<Vec<f64>>> {
    let empty = Context::empty();
    Ok(lattice_points(&model.domain_box)?
        .filter(|x| is_feasible(model, &empty, x))
        .collect())
}

/// Draws contexts for one ground truth. Holds the truth's feasible lattice
/// points so repeated draws do not re-enumerate the box.
#[derive(Debug, Clone)]
pub struct ContextSampler<'a> {
    truth: &'a MilpModel,
    feasible: Vec<Vec<f64>>,
}

impl<'a> ContextSampler<'a> {
    pub fn new(truth: &'a MilpModel) -> Result<Self> {
        let feasible = feasible_lattice_points(truth)?;
        if feasible.is_empty() {
            return Err(Error::Generator("ground truth has no feasible lattice point".into()));
        }
        Ok(Self { truth, feasible })
    }

    pub fn sample<R: Rng + ?Sized>(&self, cfg: &GenConfig, rng: &mut R) -> Result<Context> {
        let n = self.truth.num_vars();
        for _ in 0..CONTEXT_ATTEMPTS {
            let mut ctx = Context::empty();
            let mut pool: Vec<&Vec<f64>> = self.feasible.iter().collect();
            for _ in 0..cfg.context_rows {
                let Some((row, t)) = self.sample_row(n, &pool, rng) else {
                    break;
                };
                pool.retain(|x| dot(&row, x) <= t);
                ctx.s.push(row);
                ctx.t.push(t);
            }
            if ctx.num_rows() == cfg.context_rows && solve_milp(self.truth, &ctx)?.is_optimal() {
                return Ok(ctx);
            }
        }
        Err(Error::Generator(format!(
            "could not draw a feasible context in {CONTEXT_ATTEMPTS} attempts"
        )))
    }

    fn sample_row<R: Rng + ?Sized>(&self, n: usize, pool: &[&Vec<f64>], rng: &mut R) -> Option<(Vec<f64>, f64)> {
        if pool.is_empty() {
            return None;
        }
        for _ in 0..CONTEXT_ATTEMPTS {
            let dir = random_unit(n, rng);
            let (lo, hi) = (0..OFFSET_SAMPLE)
                .map(|_| dot(&dir, pool[rng.random_range(0..pool.len())]))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if hi - lo > 1e-9 {
                return Some((dir, rng.random_range(lo..hi)));
            }
        }
        None
    }
}

pub fn generate_context<R: Rng + ?Sized>(truth: &MilpModel, cfg: &GenConfig, rng: &mut R) -> Result<Context> {
    ContextSampler::new(truth)?.sample(cfg, rng)
}

/// Positives are optima of the truth in `ctx`; negatives are uniform
/// lattice points the truth does not classify as optimal.
pub fn sample_examples<R: Rng + ?Sized>(
    truth: &MilpModel,
    ctx: &Context,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<Vec<ContextualExample>> {
    let out = solve_milp(truth, ctx)?;
    let Some((point, value)) = out.optimum() else {
        return Err(Error::Generator("context is infeasible for the ground truth".into()));
    };
    let mut examples = Vec::with_capacity(cfg.pos_per_context + cfg.neg_per_context);
    if cfg.pos_per_context == 1 {
        examples.push(ContextualExample::new(ctx.clone(), point.to_vec(), true));
    } else {
        let optima = enumerate_optimum(truth, ctx)?.optimizers;
        for k in 0..cfg.pos_per_context {
            examples.push(ContextualExample::new(ctx.clone(), optima[k % optima.len()].clone(), true));
        }
    }

    let ranges: Vec<(i64, i64)> = truth.domain_box.iter().map(|&b| integer_range(b)).collect();
    for _ in 0..cfg.neg_per_context {
        let mut found = None;
        for _ in 0..NEGATIVE_DRAWS {
            let x: Vec<f64> = ranges
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..=hi) as f64)
                .collect();
            if !classify_against(truth, ctx, &x, Some(value)) {
                found = Some(x);
                break;
            }
        }
        let x = found.ok_or_else(|| {
            Error::Generator(format!("no negative example found in {NEGATIVE_DRAWS} draws"))
        })?;
        examples.push(ContextualExample::new(ctx.clone(), x, false));
    }
    Ok(examples)
}

/// Training data and held-out test contexts for a given ground truth.
pub fn generate_bundle<R: Rng + ?Sized>(
    truth: &MilpModel,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<(Dataset, Vec<Context>)> {
    cfg.validate()?;
    let sampler = ContextSampler::new(truth)?;
    let mut contexts = Vec::with_capacity(cfg.num_contexts);
    let mut examples = Vec::new();
    for _ in 0..cfg.num_contexts {
        let ctx = sampler.sample(cfg, rng)?;
        examples.extend(sample_examples(truth, &ctx, cfg, rng)?);
        contexts.push(ctx);
    }
    let mut test = Vec::with_capacity(cfg.num_test_contexts);
    while test.len() < cfg.num_test_contexts {
        let ctx = sampler.sample(cfg, rng)?;
        if !contexts.contains(&ctx) {
            test.push(ctx);
        }
    }
    let data = Dataset::new(truth.num_vars(), truth.integer_mask.clone(), truth.domain_box.clone(), examples);
    Ok((data, test))
}

/// One ground truth with its training data and test contexts.
pub fn generate_dataset<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Result<(MilpModel, Dataset, Vec<Context>)> {
    let truth = generate_ground_truth(cfg, rng)?;
    let (data, test) = generate_bundle(&truth, cfg, rng)?;
    Ok((truth, data, test))
}
