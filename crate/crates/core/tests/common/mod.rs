#![allow(dead_code)]

pub mod fd;

use milp_acquire::model::{Context, ContextualExample, Dataset, MilpModel};
use rand::Rng;

pub fn example_one() -> MilpModel {
    MilpModel::new(
        vec![vec![40.0, 30.0], vec![20.0, 40.0]],
        vec![240.0, 240.0],
        vec![20.0, 18.0],
        vec![true, true],
        vec![(0.0, 10.0); 2],
    )
}

pub fn x2_at_most_3() -> Context {
    Context::new(vec![vec![0.0, 1.0]], vec![3.0])
}

/// All-integer model with small integer coefficients. Roughly one in five
/// instances has an arbitrary right-hand side and may be infeasible.
pub fn random_model<R: Rng>(rng: &mut R, n: usize, m: usize, hi: f64) -> MilpModel {
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| loop {
            let row: Vec<f64> = (0..n).map(|_| rng.random_range(-4..=4) as f64).collect();
            if row.iter().any(|&v| v != 0.0) {
                break row;
            }
        })
        .collect();
    let anchor: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=hi)).collect();
    let b = a
        .iter()
        .map(|row| {
            if rng.random_bool(0.2) {
                rng.random_range(-10.0..10.0)
            } else {
                row.iter().zip(&anchor).map(|(r, z)| r * z).sum::<f64>() + rng.random_range(0.0..4.0)
            }
        })
        .collect();
    let c = loop {
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        if c.iter().any(|v| v.abs() > 1e-3) {
            break c;
        }
    };
    MilpModel::new(a, b, c, vec![true; n], vec![(0.0, hi); n])
}

pub fn random_context<R: Rng>(rng: &mut R, n: usize, rows: usize, hi: f64) -> Context {
    let s: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..n).map(|_| rng.random_range(-3..=3) as f64).collect())
        .collect();
    let t = s
        .iter()
        .map(|row| {
            let span: f64 = row.iter().map(|v| v.abs() * hi).sum();
            rng.random_range(-0.25 * span..=span.max(0.5))
        })
        .collect();
    Context::new(s, t)
}

/// Every integer point of the box, by plain nested counting.
pub fn box_points(model: &MilpModel) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for &(lo, hi) in &model.domain_box {
        let (lo, hi) = (lo.ceil() as i64, hi.floor() as i64);
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (lo..=hi).map(move |v| {
                    let mut q = p.clone();
                    q.push(v as f64);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn satisfies(model: &MilpModel, ctx: &Context, x: &[f64]) -> bool {
    let ok = |row: &[f64], rhs: f64| row.iter().zip(x).map(|(r, v)| r * v).sum::<f64>() <= rhs + 1e-7;
    model.a.iter().zip(&model.b).all(|(r, &b)| ok(r, b)) && ctx.s.iter().zip(&ctx.t).all(|(r, &t)| ok(r, t))
}

/// Brute-force optimum: `(value, optimizers)` or `None` when infeasible.
pub fn brute_force(model: &MilpModel, ctx: &Context) -> Option<(f64, Vec<Vec<f64>>)> {
    let feasible: Vec<Vec<f64>> = box_points(model)
        .into_iter()
        .filter(|x| satisfies(model, ctx, x))
        .collect();
    let best = feasible.iter().map(|x| model.objective(x)).fold(f64::NEG_INFINITY, f64::max);
    if feasible.is_empty() {
        return None;
    }
    let opt = feasible
        .into_iter()
        .filter(|x| model.objective(x) >= best - 1e-6)
        .collect();
    Some((best, opt))
}

/// Dataset with one positive (the brute-force optimum) and a few random
/// negatives per context, labelled by the given model.
pub fn labelled_dataset<R: Rng>(rng: &mut R, truth: &MilpModel, contexts: usize) -> Dataset {
    let n = truth.num_vars();
    let hi = truth.domain_box[0].1;
    let mut examples = Vec::new();
    let mut made = 0;
    while made < contexts {
        let ctx = random_context(rng, n, 1, hi);
        let Some((best, opt)) = brute_force(truth, &ctx) else {
            continue;
        };
        made += 1;
        examples.push(ContextualExample::new(ctx.clone(), opt[0].clone(), true));
        for _ in 0..2 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..=hi as i64) as f64).collect();
            let optimal = satisfies(truth, &ctx, &x) && truth.objective(&x) >= best - 1e-6;
            examples.push(ContextualExample::new(ctx.clone(), x, optimal));
        }
    }
    Dataset::new(n, truth.integer_mask.clone(), truth.domain_box.clone(), examples)
}
