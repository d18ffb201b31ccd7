//! Depth-first branch-and-bound over the simplex relaxation.
//!
//! Branching tightens the box itself: the floor child lowers `hi_i`, the ceil
//! child raises `lo_i`. The variable farthest from an integer is branched on,
//! lowest index first on ties, and the floor child is explored first.

use super::simplex::{self, LpProblem, LpResult};
use super::{check_solvable, SolveOutcome, SolverStats, BOUND_TOL, FEAS_TOL, INT_TOL, NODE_BUDGET};
use crate::error::{Error, Result};
use crate::model::{apply_context, dot, Context, MilpModel};

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub node_budget: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            node_budget: NODE_BUDGET,
        }
    }
}

/// Maximizes `c^T x` over the contextualized model with integrality enforced
/// on masked variables.
pub fn solve_milp(model: &MilpModel, ctx: &Context) -> Result<SolveOutcome> {
    solve_milp_with(model, ctx, &SolverOptions::default())
}

pub fn solve_milp_with(model: &MilpModel, ctx: &Context, opts: &SolverOptions) -> Result<SolveOutcome> {
    check_solvable(model)?;
    let full = apply_context(model, ctx)?;
    let mask = &full.integer_mask;
    let mut stats = SolverStats::default();

    let mut lo = Vec::with_capacity(mask.len());
    let mut hi = Vec::with_capacity(mask.len());
    for (&(l, h), &int) in full.domain_box.iter().zip(mask) {
        if int {
            lo.push((l - INT_TOL).ceil() + 0.0);
            hi.push((h + INT_TOL).floor() + 0.0);
        } else {
            lo.push(l);
            hi.push(h);
        }
    }
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Ok(SolveOutcome::infeasible(stats));
    }

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut stack = vec![(lo, hi)];
    while let Some((lo, hi)) = stack.pop() {
        stats.nodes += 1;
        if stats.nodes > opts.node_budget {
            return Err(Error::BudgetExhausted {
                nodes: opts.node_budget,
            });
        }
        let relaxed = simplex::solve(
            &LpProblem {
                rows: &full.a,
                rhs: &full.b,
                cost: &full.c,
                lo: &lo,
                hi: &hi,
            },
            &mut stats.pivots,
        )?;
        let (x, bound) = match relaxed {
            LpResult::Infeasible => continue,
            LpResult::Unbounded => return Ok(SolveOutcome::unbounded(stats)),
            LpResult::Optimal { x, value } => (x, value),
        };
        if let Some((_, best)) = &incumbent {
            if bound <= best + BOUND_TOL {
                continue;
            }
        }

        let mut branch_var: Option<(usize, f64)> = None;
        for (i, (&v, &int)) in x.iter().zip(mask).enumerate() {
            if int {
                let dist = (v - v.round()).abs();
                if branch_var.is_none_or(|(_, d)| dist > d) {
                    branch_var = Some((i, dist));
                }
            }
        }
        let integral = branch_var.is_none_or(|(_, d)| d <= INT_TOL);

        if integral {
            if let Some((point, value)) = snap(&full, &x, &lo, &hi, &mut stats)? {
                if incumbent.as_ref().is_none_or(|(_, best)| value > best + BOUND_TOL) {
                    incumbent = Some((point, value));
                }
                continue;
            }
            // The rounded point is infeasible. Keep branching on a masked
            // variable that is not exactly integral, if one exists.
            match branch_var {
                Some((_, d)) if d > 0.0 => {}
                _ => continue,
            }
        }

        let (i, _) = branch_var.expect("a fractional masked variable exists");
        let v = x[i];
        let mut up = (lo.clone(), hi.clone());
        up.0[i] = v.ceil();
        let mut down = (lo, hi);
        down.1[i] = v.floor();
        if up.0[i] <= up.1[i] {
            stack.push(up);
        }
        if down.0[i] <= down.1[i] {
            stack.push(down);
        }
    }

    Ok(match incumbent {
        Some((point, value)) => SolveOutcome::optimal(point, value, stats),
        None => SolveOutcome::infeasible(stats),
    })
}

/// Rounds masked variables of a near-integral relaxation point and repairs
/// the continuous part by re-solving with the masked variables fixed.
fn snap(
    model: &MilpModel,
    x: &[f64],
    lo: &[f64],
    hi: &[f64],
    stats: &mut SolverStats,
) -> Result<Option<(Vec<f64>, f64)>> {
    let mask = &model.integer_mask;
    let mut point: Vec<f64> = x
        .iter()
        .zip(mask)
        .map(|(&v, &int)| if int { v.round() + 0.0 } else { v })
        .collect();
    if mask.iter().any(|&int| !int) {
        let mut fixed_lo = lo.to_vec();
        let mut fixed_hi = hi.to_vec();
        for (i, &int) in mask.iter().enumerate() {
            if int {
                fixed_lo[i] = point[i];
                fixed_hi[i] = point[i];
            }
        }
        let res = simplex::solve(
            &LpProblem {
                rows: &model.a,
                rhs: &model.b,
                cost: &model.c,
                lo: &fixed_lo,
                hi: &fixed_hi,
            },
            &mut stats.pivots,
        )?;
        match res {
            LpResult::Optimal { x, .. } => {
                point = x;
                for (i, &int) in mask.iter().enumerate() {
                    if int {
                        point[i] = fixed_lo[i];
                    }
                }
            }
            _ => return Ok(None),
        }
    }
    let feasible = model
        .a
        .iter()
        .zip(&model.b)
        .all(|(row, b)| dot(row, &point) <= b + FEAS_TOL);
    if !feasible {
        return Ok(None);
    }
    let value = model.objective(&point);
    Ok(Some((point, value)))
}
