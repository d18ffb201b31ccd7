//! Dense two-phase primal simplex over a finite box.
//!
//! Variables are shifted to `y = x - lo` so every column is nonnegative and
//! the upper bounds become ordinary rows. Pivoting uses Dantzig's rule until
//! the degenerate-pivot count exceeds `10 * (rows + vars)`, after which
//! Bland's rule takes over and guarantees termination.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const REDUCED_COST_TOL: f64 = 1e-9;
const PHASE_ONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpResult {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Borrowed view of `max c^T x  s.t.  rows x <= rhs,  lo <= x <= hi`.
pub(crate) struct LpProblem<'a> {
    pub rows: &'a [Vec<f64>],
    pub rhs: &'a [f64],
    pub cost: &'a [f64],
    pub lo: &'a [f64],
    pub hi: &'a [f64],
}

struct Tableau {
    width: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
    num_rows: usize,
}

impl Tableau {
    fn row(&self, r: usize) -> &[f64] {
        &self.cells[r * self.width..(r + 1) * self.width]
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, pr: usize, pc: usize, reduced: &mut [f64]) {
        let w = self.width;
        let inv = 1.0 / self.at(pr, pc);
        for v in &mut self.cells[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        let pivot_row: Vec<f64> = self.row(pr).to_vec();
        for r in 0..self.num_rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f != 0.0 {
                let row = &mut self.cells[r * w..(r + 1) * w];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[pc] = 0.0;
            }
        }
        let f = reduced[pc];
        if f != 0.0 {
            for (v, p) in reduced.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            reduced[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }
}

struct PivotCounter {
    total: usize,
    degenerate: usize,
    bland_after: usize,
    limit: usize,
}

/// Solves the LP, adding the number of pivots performed to `pivots`.
pub(crate) fn solve(lp: &LpProblem<'_>, pivots: &mut usize) -> Result<LpResult> {
    let n = lp.cost.len();
    let m = lp.rows.len();
    let num_rows = m + n;

    let shifted_rhs: Vec<f64> = lp
        .rows
        .iter()
        .zip(lp.rhs)
        .map(|(row, &b)| b - row.iter().zip(lp.lo).map(|(a, l)| a * l).sum::<f64>())
        .chain(lp.lo.iter().zip(lp.hi).map(|(l, h)| h - l))
        .collect();

    let num_art = shifted_rhs.iter().filter(|&&r| r < 0.0).count();
    let art_start = n + num_rows;
    let width = art_start + num_art + 1;
    let mut tab = Tableau {
        width,
        cells: vec![0.0; num_rows * width],
        basis: vec![0; num_rows],
        num_rows,
    };
    let mut next_art = art_start;
    for r in 0..num_rows {
        let sign = if shifted_rhs[r] < 0.0 { -1.0 } else { 1.0 };
        let base = r * width;
        if r < m {
            for (i, a) in lp.rows[r].iter().enumerate() {
                tab.cells[base + i] = sign * a;
            }
        } else {
            tab.cells[base + (r - m)] = sign;
        }
        tab.cells[base + n + r] = sign;
        tab.cells[base + width - 1] = sign * shifted_rhs[r];
        if sign < 0.0 {
            tab.cells[base + next_art] = 1.0;
            tab.basis[r] = next_art;
            next_art += 1;
        } else {
            tab.basis[r] = n + r;
        }
    }

    let mut counter = PivotCounter {
        total: 0,
        degenerate: 0,
        bland_after: 10 * (m + n),
        limit: 50 * (num_rows + width) + 1000,
    };

    if num_art > 0 {
        let mut cost = vec![0.0; width - 1];
        cost[art_start..].iter_mut().for_each(|c| *c = 1.0);
        match run_phase(&mut tab, &cost, width - 1, &mut counter) {
            Ok(PhaseEnd::Optimal) => {}
            Ok(PhaseEnd::Unbounded) => unreachable!("phase one objective is bounded below"),
            Err(e) => {
                *pivots += counter.total;
                return Err(e);
            }
        }
        let infeasibility: f64 = (0..num_rows)
            .filter(|&r| tab.basis[r] >= art_start)
            .map(|r| tab.rhs(r))
            .sum();
        let scale = 1.0 + shifted_rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if infeasibility > PHASE_ONE_TOL * scale {
            *pivots += counter.total;
            return Ok(LpResult::Infeasible);
        }
        // Pivot remaining zero-level artificials out of the basis where possible.
        for r in 0..num_rows {
            if tab.basis[r] < art_start {
                continue;
            }
            if let Some(col) = (0..art_start).find(|&j| tab.at(r, j).abs() > PIVOT_TOL) {
                let mut scratch = vec![0.0; width];
                tab.pivot(r, col, &mut scratch);
                counter.total += 1;
            }
        }
    }

    let mut cost = vec![0.0; width - 1];
    for (j, c) in lp.cost.iter().enumerate() {
        cost[j] = -c;
    }
    let outcome = run_phase(&mut tab, &cost, art_start, &mut counter);
    *pivots += counter.total;
    match outcome? {
        PhaseEnd::Unbounded => Ok(LpResult::Unbounded),
        PhaseEnd::Optimal => {
            let mut y = vec![0.0; n];
            for r in 0..num_rows {
                if tab.basis[r] < n {
                    y[tab.basis[r]] = tab.rhs(r);
                }
            }
            let x: Vec<f64> = y
                .iter()
                .zip(lp.lo.iter().zip(lp.hi))
                .map(|(v, (&l, &h))| (l + v).clamp(l, h))
                .collect();
            let value = x.iter().zip(lp.cost).map(|(a, b)| a * b).sum();
            Ok(LpResult::Optimal { x, value })
        }
    }
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

/// Minimizes `cost . z` over the current tableau, entering only columns below
/// `enter_limit`.
fn run_phase(
    tab: &mut Tableau,
    cost: &[f64],
    enter_limit: usize,
    counter: &mut PivotCounter,
) -> Result<PhaseEnd> {
    let width = tab.width;
    let mut reduced = vec![0.0; width];
    reduced[..cost.len()].copy_from_slice(cost);
    for r in 0..tab.num_rows {
        let cb = cost[tab.basis[r]];
        if cb != 0.0 {
            for (v, t) in reduced.iter_mut().zip(tab.row(r)) {
                *v -= cb * t;
            }
        }
    }

    loop {
        let bland = counter.degenerate > counter.bland_after;
        let entering = if bland {
            (0..enter_limit).find(|&j| reduced[j] < -REDUCED_COST_TOL)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for (j, &d) in reduced.iter().enumerate().take(enter_limit) {
                if d < -REDUCED_COST_TOL && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
            best.map(|(j, _)| j)
        };
        let Some(col) = entering else {
            return Ok(PhaseEnd::Optimal);
        };

        let mut leaving: Option<(usize, f64)> = None;
        for r in 0..tab.num_rows {
            let a = tab.at(r, col);
            if a > PIVOT_TOL {
                let ratio = tab.rhs(r).max(0.0) / a;
                let better = match leaving {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - 1e-12
                            || (ratio <= lratio + 1e-12 && tab.basis[r] < tab.basis[lr])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
        }
        let Some((row, ratio)) = leaving else {
            return Ok(PhaseEnd::Unbounded);
        };

        if ratio <= 1e-12 {
            counter.degenerate += 1;
        }
        counter.total += 1;
        if counter.total > counter.limit {
            return Err(Error::SimplexStall {
                pivots: counter.total,
            });
        }
        tab.pivot(row, col, &mut reduced);
    }
}
