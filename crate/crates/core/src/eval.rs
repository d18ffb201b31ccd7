//! Quality of a learned model against a ground truth, computed exactly over
//! the integer lattice of the shared box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Context, MilpModel};
use crate::solver::{is_feasible, lattice_points, solve_milp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Share of the true feasible lattice covered by the learned model.
    pub recall: f64,
    /// Share of the learned feasible lattice that is truly feasible.
    pub precision: f64,
    /// Share of test contexts whose learned optimum is missing or truly
    /// infeasible.
    pub infeasibility: f64,
    /// Mean relative regret over the remaining contexts, under the true cost.
    pub mean_regret: f64,
    pub num_test_contexts: usize,
    /// Contexts that entered the regret mean. Zero means `mean_regret` is 0
    /// by convention.
    pub num_feasible_contexts: usize,
}

/// `(recall, precision)` of the learned feasible region.
pub fn region_metrics(learned: &MilpModel, truth: &MilpModel) -> Result<(f64, f64)> {
    if learned.domain_box != truth.domain_box {
        return Err(Error::DimensionMismatch("learned and true models must share a box".into()));
    }
    let empty = Context::empty();
    let (mut both, mut in_truth, mut in_learned) = (0usize, 0usize, 0usize);
    for x in lattice_points(&truth.domain_box)? {
        let t = is_feasible(truth, &empty, &x);
        let l = is_feasible(learned, &empty, &x);
        in_truth += usize::from(t);
        in_learned += usize::from(l);
        both += usize::from(t && l);
    }
    let recall = if in_truth == 0 { 1.0 } else { both as f64 / in_truth as f64 };
    let precision = if in_learned == 0 { 1.0 } else { both as f64 / in_learned as f64 };
    Ok((recall, precision))
}

/// Per-context outcome used by [`contextual_metrics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContextOutcome {
    Infeasible,
    Regret(f64),
}

pub fn context_outcome(learned: &MilpModel, truth: &MilpModel, ctx: &Context) -> Result<ContextOutcome> {
    let Some((x_hat, _)) = solve_milp(learned, ctx)?.optimum().map(|(p, v)| (p.to_vec(), v)) else {
        return Ok(ContextOutcome::Infeasible);
    };
    if !is_feasible(truth, ctx, &x_hat) {
        return Ok(ContextOutcome::Infeasible);
    }
    let best = solve_milp(truth, ctx)?;
    let (_, v_star) = best.optimum().ok_or_else(|| {
        Error::InvalidConfig("test context is infeasible for the ground truth".into())
    })?;
    let gap = (v_star - truth.objective(&x_hat)).max(0.0);
    Ok(ContextOutcome::Regret(relative_gap(gap, v_star)))
}

/// `gap / |v_star|`, falling back to the absolute gap when the optimum value
/// is zero (so `0 / 0 = 0`).
fn relative_gap(gap: f64, v_star: f64) -> f64 {
    if v_star.abs() < 1e-12 {
        gap
    } else {
        gap / v_star.abs()
    }
}

/// `(infeasibility, mean_regret, feasible_contexts)` over the test contexts.
pub fn contextual_metrics(
    learned: &MilpModel,
    truth: &MilpModel,
    test_contexts: &[Context],
) -> Result<(f64, f64, usize)> {
    if test_contexts.is_empty() {
        return Ok((0.0, 0.0, 0));
    }
    let mut infeasible = 0usize;
    let mut regrets = Vec::new();
    for ctx in test_contexts {
        match context_outcome(learned, truth, ctx)? {
            ContextOutcome::Infeasible => infeasible += 1,
            ContextOutcome::Regret(r) => regrets.push(r),
        }
    }
    let mean = if regrets.is_empty() {
        0.0
    } else {
        regrets.iter().sum::<f64>() / regrets.len() as f64
    };
    Ok((infeasible as f64 / test_contexts.len() as f64, mean, regrets.len()))
}

pub fn evaluate(learned: &MilpModel, truth: &MilpModel, test_contexts: &[Context]) -> Result<EvalReport> {
    let (recall, precision) = region_metrics(learned, truth)?;
    let (infeasibility, mean_regret, num_feasible_contexts) = contextual_metrics(learned, truth, test_contexts)?;
    Ok(EvalReport {
        recall,
        precision,
        infeasibility,
        mean_regret,
        num_test_contexts: test_contexts.len(),
        num_feasible_contexts,
    })
}
