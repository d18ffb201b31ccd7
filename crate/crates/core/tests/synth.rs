mod common;

use common::{brute_force, example_one, x2_at_most_3};
use milp_acquire::loss::{classify, zero_one_loss};
use milp_acquire::model::Context;
use milp_acquire::solver::solve_milp;
use milp_acquire::synth::{
    data_rng, feasible_lattice_points, generate_bundle, generate_ground_truth, sample_examples, truth_rng, GenConfig,
};

fn small() -> GenConfig {
    GenConfig {
        n: 3,
        m: 3,
        num_contexts: 40,
        domain_box: (0.0, 6.0),
        num_test_contexts: 20,
        ..GenConfig::default()
    }
}

#[test]
fn default_config_shapes() {
    let cfg = GenConfig::default();
    let truth = generate_ground_truth(&cfg, &mut truth_rng(0, 0)).unwrap();
    assert_eq!((truth.num_vars(), truth.num_rows()), (5, 5));
    assert!(truth.is_all_integer());
    assert!(solve_milp(&truth, &Context::empty()).unwrap().is_optimal());
    assert!(feasible_lattice_points(&truth).unwrap().len() >= 50);
    let (data, test) = generate_bundle(&truth, &cfg, &mut data_rng(0, 0, 0)).unwrap();
    assert_eq!(data.len(), 750);
    assert_eq!(test.len(), 100);
    assert_eq!(zero_one_loss(&truth, &data).unwrap(), 0.0);
}

#[test]
fn generated_data_invariants() {
    for ratio in [(1, 2), (2, 3)] {
        let cfg = GenConfig {
            pos_per_context: ratio.0,
            neg_per_context: ratio.1,
            context_rows: 2,
            ..small()
        };
        for i in 0..3 {
            let truth = generate_ground_truth(&cfg, &mut truth_rng(5, i)).unwrap();
            let (data, test) = generate_bundle(&truth, &cfg, &mut data_rng(5, i, 0)).unwrap();
            data.validate().unwrap();
            let pos = data.examples.iter().filter(|e| e.label).count();
            let neg = data.len() - pos;
            assert_eq!(pos * ratio.1, neg * ratio.0);
            assert_eq!(data.len(), cfg.num_contexts * (ratio.0 + ratio.1));
            for e in &data.examples {
                assert_eq!(e.context.num_rows(), cfg.context_rows);
                assert_eq!(classify(&truth, &e.context, &e.point).unwrap(), e.label);
            }
            for ctx in data.examples.iter().map(|e| &e.context).chain(&test) {
                assert!(brute_force(&truth, ctx).is_some());
            }
            for ctx in &test {
                assert!(data.examples.iter().all(|e| &e.context != ctx));
            }
        }
    }
}

#[test]
fn worked_example_examples() {
    let cfg = GenConfig {
        n: 2,
        domain_box: (0.0, 10.0),
        ..GenConfig::default()
    };
    let mut rng = data_rng(0, 0, 0);
    let free = sample_examples(&example_one(), &Context::empty(), &cfg, &mut rng).unwrap();
    assert_eq!(free[0].point, vec![3.0, 4.0]);
    assert!(free[0].label);
    let limited = sample_examples(&example_one(), &x2_at_most_3(), &cfg, &mut rng).unwrap();
    assert_eq!(limited[0].point, vec![6.0, 0.0]);
    assert!(limited[0].label);
    assert!(limited[1..].iter().all(|e| !e.label));
}

#[test]
fn generation_is_reproducible() {
    let cfg = small();
    let run = || {
        let truth = generate_ground_truth(&cfg, &mut truth_rng(3, 1)).unwrap();
        let bundle = generate_bundle(&truth, &cfg, &mut data_rng(3, 1, 2)).unwrap();
        serde_json::to_string(&(truth, bundle)).unwrap()
    };
    assert_eq!(run(), run());
    let truth = generate_ground_truth(&cfg, &mut truth_rng(3, 1)).unwrap();
    let other = generate_bundle(&truth, &cfg, &mut data_rng(3, 1, 3)).unwrap();
    assert_ne!(
        serde_json::to_string(&other).unwrap(),
        serde_json::to_string(&generate_bundle(&truth, &cfg, &mut data_rng(3, 1, 2)).unwrap()).unwrap()
    );
}

#[test]
fn bad_configs_are_rejected() {
    for cfg in [
        GenConfig { n: 0, ..small() },
        GenConfig { pos_per_context: 0, ..small() },
        GenConfig { domain_box: (3.0, 1.0), ..small() },
    ] {
        assert!(generate_ground_truth(&cfg, &mut truth_rng(0, 0)).is_err());
    }
}
