use milp_acquire::loss::{classify, surrogate_gradient, surrogate_loss, CaseTag, Gradient};
use milp_acquire::model::{Context, ContextualExample, Dataset, MilpModel};
use milp_acquire::solver::solve_milp;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{labelled_dataset, random_model};

pub const H: f64 = 1e-5;

pub fn num_params(model: &MilpModel) -> usize {
    model.num_vars() * (model.num_rows() + 1) + model.num_rows()
}

/// Parameter `k` in the order `c`, then `A` row-major, then `b`.
pub fn param_mut(model: &mut MilpModel, k: usize) -> &mut f64 {
    let n = model.num_vars();
    let m = model.num_rows();
    if k < n {
        &mut model.c[k]
    } else if k < n + m * n {
        let r = k - n;
        &mut model.a[r / n][r % n]
    } else {
        &mut model.b[k - n - m * n]
    }
}

pub fn grad_component(g: &Gradient, n: usize, k: usize) -> f64 {
    let m = g.d_b.len();
    if k < n {
        g.d_c[k]
    } else if k < n + m * n {
        let r = k - n;
        g.d_a[r / n][r % n]
    } else {
        g.d_b[k - n - m * n]
    }
}

pub fn shifted(model: &MilpModel, k: usize, delta: f64) -> MilpModel {
    let mut out = model.clone();
    *param_mut(&mut out, k) += delta;
    out
}

pub type Signature = (Vec<(CaseTag, bool)>, Vec<Option<Vec<f64>>>);

/// Case tags plus each context's optimum: everything the analytical
/// gradient treats as locally constant.
pub fn signature(model: &MilpModel, data: &Dataset) -> Signature {
    let tags = surrogate_loss(model, data)
        .unwrap()
        .per_example
        .iter()
        .map(|e| (e.case, e.degenerate))
        .collect();
    let optima = data
        .examples
        .iter()
        .map(|e| solve_milp(model, &e.context).unwrap().point)
        .collect();
    (tags, optima)
}

pub fn loss(model: &MilpModel, data: &Dataset) -> f64 {
    surrogate_loss(model, data).unwrap().surrogate
}

pub enum Check {
    NearBoundary,
    Kink,
    Compared(f64),
}

pub fn check_pair(model: &MilpModel, data: &Dataset) -> Check {
    let base = signature(model, data);
    let p = num_params(model);
    for k in 0..p {
        for delta in [2.0 * H, -2.0 * H] {
            if signature(&shifted(model, k, delta), data) != base {
                return Check::NearBoundary;
            }
        }
    }
    let g = surrogate_gradient(model, data).unwrap();
    let f0 = loss(model, data);
    let mut worst: f64 = 0.0;
    for k in 0..p {
        let fp = loss(&shifted(model, k, H), data);
        let fm = loss(&shifted(model, k, -H), data);
        let central = (fp - fm) / (2.0 * H);
        let forward = (fp - f0) / H;
        let backward = (f0 - fm) / H;
        if (forward - backward).abs() > 1e-3 * central.abs().max(1.0) {
            return Check::Kink;
        }
        let analytic = grad_component(&g, model.num_vars(), k);
        let scale = analytic.abs().max(central.abs());
        if scale >= 1e-6 {
            worst = worst.max((analytic - central).abs() / scale);
        }
    }
    Check::Compared(worst)
}

/// Ground truth with a noisy copy as the hypothesis, so that every case of
/// the loss shows up.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (MilpModel, Dataset) {
    loop {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(2..=3);
        let truth = random_model(rng, n, m, 6.0);
        if solve_milp(&truth, &Context::empty()).unwrap().point.is_none() {
            continue;
        }
        let mut data = labelled_dataset(rng, &truth, 6);
        let mut learned = truth.clone();
        for v in learned.a.iter_mut().flatten().chain(learned.b.iter_mut()).chain(learned.c.iter_mut()) {
            *v += rng.random_range(-0.7..0.7);
        }
        if learned.a.iter().any(|r| r.iter().all(|v| v.abs() < 1e-3)) {
            continue;
        }
        // The hypothesis's own optimum, where the truth rejects it, is a
        // negative predicted optimal.
        let contexts: Vec<Context> = data.examples.iter().step_by(3).map(|e| e.context.clone()).collect();
        for ctx in contexts {
            if let Some(x) = solve_milp(&learned, &ctx).unwrap().point {
                if !classify(&truth, &ctx, &x).unwrap() {
                    data.examples.push(ContextualExample::new(ctx, x, false));
                }
            }
        }
        if loss(&learned, &data) > 0.0 {
            return (learned, data);
        }
    }
}

pub struct FdSummary {
    pub pairs: usize,
    pub skipped: usize,
    pub worst: f64,
    pub cases: usize,
}

/// Compares gradients on `pairs` random pairs away from case boundaries.
/// Fails on the first component outside `tol`.
pub fn run_fd_check(seed: u64, pairs: usize, tol: f64) -> Result<FdSummary, String> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = FdSummary { pairs: 0, skipped: 0, worst: 0.0, cases: 0 };
    let mut cases = std::collections::HashSet::new();
    while summary.pairs < pairs {
        if summary.skipped >= 25 * pairs {
            return Err(format!("only {} pairs away from case boundaries", summary.pairs));
        }
        let (model, data) = random_pair(&mut rng);
        match check_pair(&model, &data) {
            Check::Compared(err) => {
                if err > tol {
                    return Err(format!("relative error {err:.3e} on {model:?}"));
                }
                summary.worst = summary.worst.max(err);
                summary.pairs += 1;
                for e in surrogate_loss(&model, &data).unwrap().per_example {
                    cases.insert(e.case);
                }
            }
            Check::NearBoundary | Check::Kink => summary.skipped += 1,
        }
    }
    summary.cases = cases.len();
    Ok(summary)
}
