//! The contextual classifier, the 0-1 training loss, and the case-wise
//! surrogate with its analytical gradient.
//!
//! Every misclassified example falls into one case:
//!
//! | case                     | contribution                                        |
//! |--------------------------|-----------------------------------------------------|
//! | positive, feasible       | `reg(x) + min_j dist_j(x*) + min_j dist_j(x)`       |
//! | positive, infeasible     | `sum_j [a_j.x > b_j] dist_j(x)`                     |
//! | negative, predicted opt. | `exp(-abs(reg(x))) + min_j dist_j(x)`               |
//!
//! where `reg(x) = c.(x* - x)` uses the learned `c` and `x*` is the model's
//! optimum in the example's context. Gradients hold `x*` fixed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dot, l2_norm, Context, Dataset, MilpModel};
use crate::solver::{is_feasible, solve_milp, FEAS_TOL};

/// Absolute slack allowed when comparing a point's value to the optimum.
pub const EPS_OPT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    Correct,
    PosFeasibleSubopt,
    PosInfeasible,
    NegPredictedOptimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleLoss {
    pub case: CaseTag,
    pub contribution: f64,
    /// Set when a positive example satisfies every learned row yet cannot be
    /// optimal for reasons the parameters do not control (context, box,
    /// integrality, or an empty contextual feasible set). Only the
    /// `min_j dist_j(x)` term is charged.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub zero_one: f64,
    pub surrogate: f64,
    pub per_example: Vec<ExampleLoss>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub d_c: Vec<f64>,
    pub d_a: Vec<Vec<f64>>,
    pub d_b: Vec<f64>,
}

impl Gradient {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            d_c: vec![0.0; n],
            d_a: vec![vec![0.0; n]; m],
            d_b: vec![0.0; m],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.d_c
            .iter()
            .chain(self.d_a.iter().flatten())
            .chain(&self.d_b)
            .all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.d_c
            .iter()
            .chain(self.d_a.iter().flatten())
            .chain(&self.d_b)
            .all(|v| v.is_finite())
    }
}

/// Loss, breakdown, and (optionally) gradient from one pass over the data.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub breakdown: LossBreakdown,
    pub gradient: Option<Gradient>,
    /// Number of MILP solves performed (one per distinct context).
    pub solves: usize,
}

impl Evaluation {
    pub fn zero_one(&self) -> f64 {
        self.breakdown.zero_one
    }

    pub fn surrogate(&self) -> f64 {
        self.breakdown.surrogate
    }
}

/// `|a_j.x - b_j| / ||a_j||`.
pub fn distance_to_hyperplane(model: &MilpModel, j: usize, x: &[f64]) -> Result<f64> {
    let row = model.a.get(j).ok_or(Error::RowOutOfRange {
        index: j,
        rows: model.num_rows(),
    })?;
    let norm = l2_norm(row);
    if norm == 0.0 {
        return Err(Error::DegenerateRow(j));
    }
    Ok((dot(row, x) - model.b[j]).abs() / norm)
}

/// `c.(x_star - x)` under the model's own cost vector.
pub fn regret(model: &MilpModel, x: &[f64], x_star: &[f64]) -> f64 {
    model.objective(x_star) - model.objective(x)
}

/// 1 iff `x` is an optimum of the model in context `ctx`.
pub fn classify(model: &MilpModel, ctx: &Context, x: &[f64]) -> Result<bool> {
    let out = solve_milp(model, ctx)?;
    Ok(classify_against(model, ctx, x, out.value))
}

/// Classification given the already-computed contextual optimum value.
pub(crate) fn classify_against(model: &MilpModel, ctx: &Context, x: &[f64], optimum: Option<f64>) -> bool {
    match optimum {
        Some(v) => is_feasible(model, ctx, x) && model.objective(x) >= v - EPS_OPT,
        None => false,
    }
}

pub fn zero_one_loss(model: &MilpModel, data: &Dataset) -> Result<f64> {
    Ok(evaluate_surrogate(model, data, false)?.breakdown.zero_one)
}

pub fn surrogate_loss(model: &MilpModel, data: &Dataset) -> Result<LossBreakdown> {
    Ok(evaluate_surrogate(model, data, false)?.breakdown)
}

pub fn surrogate_gradient(model: &MilpModel, data: &Dataset) -> Result<Gradient> {
    Ok(evaluate_surrogate(model, data, true)?
        .gradient
        .expect("gradient requested"))
}

/// Solves the model once per distinct context and scores every example.
pub fn evaluate_surrogate(model: &MilpModel, data: &Dataset, with_gradient: bool) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::InvalidDataset("dataset has no examples".into()));
    }
    let m = model.num_rows();
    let n = model.num_vars();
    let norms: Vec<f64> = model.a.iter().map(|r| l2_norm(r)).collect();
    if let Some(j) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::DegenerateRow(j));
    }

    let groups = data.context_groups();
    let mut optima: Vec<Option<(Vec<f64>, f64)>> = vec![None; data.len()];
    for group in &groups {
        let ctx = &data.examples[group.representative].context;
        let out = solve_milp(model, ctx)?;
        let opt = match (out.point, out.value) {
            (Some(p), Some(v)) => Some((p, v)),
            _ => None,
        };
        for &k in &group.members {
            optima[k] = opt.clone();
        }
    }

    let geometry = Geometry { model, norms: &norms };
    let scale = 1.0 / data.len() as f64;
    let mut gradient = with_gradient.then(|| Gradient::zeros(m, n));
    let mut per_example = Vec::with_capacity(data.len());
    let mut wrong = 0usize;
    let mut total = 0.0;

    for (ex, opt) in data.examples.iter().zip(&optima) {
        let x = ex.point.as_slice();
        let feasible = is_feasible(model, &ex.context, x);
        let opt_value = opt.as_ref().map(|(_, v)| *v);
        let predicted = feasible && opt_value.is_some_and(|v| model.objective(x) >= v - EPS_OPT);
        if predicted == ex.label {
            per_example.push(ExampleLoss {
                case: CaseTag::Correct,
                contribution: 0.0,
                degenerate: false,
            });
            continue;
        }
        wrong += 1;

        let mut item = if ex.label {
            let violated: Vec<usize> = (0..m)
                .filter(|&j| dot(&model.a[j], x) > model.b[j] + FEAS_TOL)
                .collect();
            if !violated.is_empty() {
                let mut value = 0.0;
                for &j in &violated {
                    value += geometry.dist(j, x);
                    if let Some(g) = gradient.as_mut() {
                        geometry.dist_grad(j, x, scale, g);
                    }
                }
                ExampleLoss {
                    case: CaseTag::PosInfeasible,
                    contribution: value,
                    degenerate: false,
                }
            } else if let (true, Some((x_star, _))) = (feasible, opt.as_ref()) {
                let (j_star, d_star) = geometry.closest(x_star);
                let (j_x, d_x) = geometry.closest(x);
                let reg = regret(model, x, x_star);
                if let Some(g) = gradient.as_mut() {
                    for (gc, (xs, xv)) in g.d_c.iter_mut().zip(x_star.iter().zip(x)) {
                        *gc += scale * (xs - xv);
                    }
                    geometry.dist_grad(j_star, x_star, scale, g);
                    geometry.dist_grad(j_x, x, scale, g);
                }
                ExampleLoss {
                    case: CaseTag::PosFeasibleSubopt,
                    contribution: reg + d_star + d_x,
                    degenerate: false,
                }
            } else {
                let (j_x, d_x) = geometry.closest(x);
                if let Some(g) = gradient.as_mut() {
                    geometry.dist_grad(j_x, x, scale, g);
                }
                ExampleLoss {
                    case: CaseTag::PosFeasibleSubopt,
                    contribution: d_x,
                    degenerate: true,
                }
            }
        } else {
            let (x_star, _) = opt.as_ref().expect("predicted positive implies an optimum");
            let reg = regret(model, x, x_star);
            let decay = (-reg.abs()).exp();
            let (j_x, d_x) = geometry.closest(x);
            if let Some(g) = gradient.as_mut() {
                let coef = -decay * sign(reg);
                if coef != 0.0 {
                    for (gc, (xs, xv)) in g.d_c.iter_mut().zip(x_star.iter().zip(x)) {
                        *gc += scale * coef * (xs - xv);
                    }
                }
                geometry.dist_grad(j_x, x, scale, g);
            }
            ExampleLoss {
                case: CaseTag::NegPredictedOptimal,
                contribution: decay + d_x,
                degenerate: false,
            }
        };
        item.contribution = item.contribution.max(0.0);
        total += item.contribution;
        per_example.push(item);
    }

    Ok(Evaluation {
        breakdown: LossBreakdown {
            zero_one: wrong as f64 / data.len() as f64,
            surrogate: total * scale,
            per_example,
        },
        gradient,
        solves: groups.len(),
    })
}

struct Geometry<'a> {
    model: &'a MilpModel,
    norms: &'a [f64],
}

impl Geometry<'_> {
    fn residual(&self, j: usize, x: &[f64]) -> f64 {
        dot(&self.model.a[j], x) - self.model.b[j]
    }

    fn dist(&self, j: usize, x: &[f64]) -> f64 {
        self.residual(j, x).abs() / self.norms[j]
    }

    /// Closest hyperplane, lowest index on ties.
    fn closest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, self.dist(0, x));
        for j in 1..self.norms.len() {
            let d = self.dist(j, x);
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }

    /// Adds `scale * grad dist_j(x)` with respect to `(a_j, b_j)`.
    fn dist_grad(&self, j: usize, x: &[f64], scale: f64, g: &mut Gradient) {
        let r = self.residual(j, x);
        let norm = self.norms[j];
        let s = sign(r);
        let row = &self.model.a[j];
        let cubed = norm * norm * norm;
        for ((ga, &xi), &ai) in g.d_a[j].iter_mut().zip(x).zip(row) {
            *ga += scale * (s * xi / norm - r.abs() * ai / cubed);
        }
        g.d_b[j] += scale * (-s / norm);
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
