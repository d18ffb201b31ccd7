//! Exact desk-scale MILP optimization.
//!
//! [`solve_lp`] solves the LP relaxation with a dense two-phase simplex;
//! [`solve_milp`] adds depth-first branch-and-bound on top of it; and
//! [`enumerate_optimum`] scans every lattice point of the box and serves as
//! the test oracle for both.

mod branch;
mod lattice;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{apply_context, Context, MilpModel};

pub use branch::{solve_milp, solve_milp_with, SolverOptions};
pub use lattice::{integer_range, lattice_points, lattice_size, LatticePoints, MAX_LATTICE_POINTS};

/// Absolute row feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-6;
/// Distance from the nearest integer accepted as integral.
pub const INT_TOL: f64 = 1e-5;
/// Minimum LP-bound improvement required to keep a node open.
pub const BOUND_TOL: f64 = 1e-9;
/// Default branch-and-bound node budget.
pub const NODE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes: usize,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Present iff `status` is optimal.
    pub point: Option<Vec<f64>>,
    /// `c^T point`; present iff `status` is optimal.
    pub value: Option<f64>,
    pub stats: SolverStats,
}

impl SolveOutcome {
    pub fn optimal(point: Vec<f64>, value: f64, stats: SolverStats) -> Self {
        Self {
            status: SolveStatus::Optimal,
            point: Some(point),
            value: Some(value),
            stats,
        }
    }

    pub fn infeasible(stats: SolverStats) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            point: None,
            value: None,
            stats,
        }
    }

    pub fn unbounded(stats: SolverStats) -> Self {
        Self {
            status: SolveStatus::Unbounded,
            point: None,
            value: None,
            stats,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// The optimum as `(point, value)`, if any.
    pub fn optimum(&self) -> Option<(&[f64], f64)> {
        match (&self.point, self.value) {
            (Some(p), Some(v)) => Some((p.as_slice(), v)),
            _ => None,
        }
    }
}

fn check_solvable(model: &MilpModel) -> Result<()> {
    let n = model.num_vars();
    let dims_ok = n > 0
        && model.b.len() == model.num_rows()
        && model.a.iter().all(|r| r.len() == n)
        && model.integer_mask.len() == n
        && model.domain_box.len() == n;
    if !dims_ok {
        return Err(Error::DimensionMismatch("model dimensions are inconsistent".into()));
    }
    Ok(())
}

/// Solves the LP relaxation (integrality ignored) of `model` over its box.
pub fn solve_lp(model: &MilpModel) -> Result<SolveOutcome> {
    check_solvable(model)?;
    let (lo, hi): (Vec<f64>, Vec<f64>) = model.domain_box.iter().copied().unzip();
    let mut stats = SolverStats {
        nodes: 1,
        pivots: 0,
    };
    let lp = simplex::LpProblem {
        rows: &model.a,
        rhs: &model.b,
        cost: &model.c,
        lo: &lo,
        hi: &hi,
    };
    let res = simplex::solve(&lp, &mut stats.pivots)?;
    Ok(match res {
        simplex::LpResult::Optimal { x, value } => SolveOutcome::optimal(x, value, stats),
        simplex::LpResult::Infeasible => SolveOutcome::infeasible(stats),
        simplex::LpResult::Unbounded => SolveOutcome::unbounded(stats),
    })
}

/// True iff `x` satisfies the model rows, the context rows, and the box within
/// [`FEAS_TOL`], and masked variables are within [`INT_TOL`] of an integer.
pub fn is_feasible(model: &MilpModel, ctx: &Context, x: &[f64]) -> bool {
    let n = model.num_vars();
    if x.len() != n {
        return false;
    }
    let box_ok = x
        .iter()
        .zip(&model.domain_box)
        .all(|(v, (lo, hi))| *v >= lo - FEAS_TOL && *v <= hi + FEAS_TOL);
    let int_ok = x
        .iter()
        .zip(&model.integer_mask)
        .all(|(v, &int)| !int || (v - v.round()).abs() <= INT_TOL);
    box_ok
        && int_ok
        && rows_hold(&model.a, &model.b, x)
        && ctx.s.iter().all(|r| r.len() == n)
        && rows_hold(&ctx.s, &ctx.t, x)
}

fn rows_hold(rows: &[Vec<f64>], rhs: &[f64], x: &[f64]) -> bool {
    rows.iter()
        .zip(rhs)
        .all(|(row, b)| crate::model::dot(row, x) <= b + FEAS_TOL)
}

/// Result of exhaustive lattice enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub outcome: SolveOutcome,
    /// Every feasible lattice point within `EPS_OPT` of the optimal value,
    /// in lexicographic order.
    pub optimizers: Vec<Vec<f64>>,
    pub feasible_count: usize,
}

/// Scans every integer point of the box and keeps the best feasible ones.
pub fn enumerate_optimum(model: &MilpModel, ctx: &Context) -> Result<Enumeration> {
    check_solvable(model)?;
    if !model.is_all_integer() {
        return Err(Error::NotAllInteger);
    }
    let full = apply_context(model, ctx)?;
    let empty = Context::empty();
    let mut best: Option<f64> = None;
    let mut scored: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut feasible_count = 0;
    for x in lattice_points(&model.domain_box)? {
        if !is_feasible(&full, &empty, &x) {
            continue;
        }
        feasible_count += 1;
        let v = model.objective(&x);
        let threshold = best.map_or(f64::NEG_INFINITY, |b| b - crate::loss::EPS_OPT);
        if v >= threshold {
            if best.is_none_or(|b| v > b) {
                best = Some(v);
            }
            scored.push((x, v));
        }
    }
    let stats = SolverStats::default();
    let Some(best) = best else {
        return Ok(Enumeration {
            outcome: SolveOutcome::infeasible(stats),
            optimizers: Vec::new(),
            feasible_count,
        });
    };
    let optimizers: Vec<Vec<f64>> = scored
        .into_iter()
        .filter(|(_, v)| *v >= best - crate::loss::EPS_OPT)
        .map(|(x, _)| x)
        .collect();
    let argmax = optimizers
        .iter()
        .find(|x| model.objective(x) == best)
        .cloned()
        .expect("best value is attained");
    Ok(Enumeration {
        outcome: SolveOutcome::optimal(argmax, best, stats),
        optimizers,
        feasible_count,
    })
}
