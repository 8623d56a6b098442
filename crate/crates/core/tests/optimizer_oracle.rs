//! Ensemble results checked against exhaustive enumeration on small random
//! instances.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use concord_core::combinatorics::{brute_force_optimum, for_each_partition, labels_feasible};
use concord_core::objective::{is_feasible, modularity};
use concord_core::{
    chain_rng, run_ensemble, Assignment, CoolingSchedule64, Graph64, OptimizerConfig64,
    PenaltySchedule, VertexVolumes,
};

fn random_graph(rng: &mut ChaCha8Rng, p: usize) -> Graph64 {
    loop {
        let mut edges = Vec::new();
        for u in 0..p {
            for v in u + 1..p {
                if rng.random::<f64>() < 0.5 {
                    edges.push((u, v, rng.random_range(1..=3) as f64));
                }
            }
        }
        if !edges.is_empty() {
            return Graph64::from_edge_list(&edges, p).unwrap();
        }
    }
}

fn exp_config(penalty: PenaltySchedule, sweeps: usize, rounds: usize) -> OptimizerConfig64 {
    OptimizerConfig64::new(
        penalty,
        CoolingSchedule64::exponential(1.0).unwrap(),
        sweeps,
        rounds,
    )
}

#[test]
fn unconstrained_ensembles_match_brute_force() {
    let mut rng = chain_rng(0x0AC1E, 0);
    let mut hits = 0;
    let instances = 12;
    for i in 0..instances {
        let p = rng.random_range(4..=7);
        let graph = random_graph(&mut rng, p);
        let volumes = VertexVolumes::zero(p);
        let (_, q_star) = brute_force_optimum(&graph, &volumes, 0, false)
            .unwrap()
            .unwrap();
        let config = exp_config(PenaltySchedule::ConstantZero, 25, 2);
        let result = run_ensemble(&graph, &volumes, 0, &[config], 32, 1000 + i).unwrap();
        let q = modularity(&graph, &result.best_overall.assignment).unwrap();
        if (q - q_star).abs() <= 1e-12 {
            hits += 1;
        }
    }
    assert!(hits >= instances - 1, "only {hits}/{instances} matched");
}

#[test]
fn constrained_ensembles_match_brute_force_and_stay_feasible() {
    let mut rng = chain_rng(0x0AC1E, 1);
    let mut hits = 0;
    let instances = 10;
    for i in 0..instances {
        let p = 4;
        let graph = random_graph(&mut rng, p);
        let mut volumes = vec![0u64; p];
        volumes[0] = rng.random_range(3..=9);
        volumes[1] = rng.random_range(3..=9);
        let volumes = VertexVolumes::new(volumes);
        let tau = rng.random_range(0..volumes.volume(0).min(volumes.volume(1)));

        let (_, q_star) = brute_force_optimum(&graph, &volumes, tau, true)
            .unwrap()
            .expect("feasible space is non-empty below both volumes");

        let config = exp_config(PenaltySchedule::SwitchAtFold(2), 25, 4);
        let result = run_ensemble(&graph, &volumes, tau, &[config], 64, 7000 + i).unwrap();
        let best = result.best_feasible.expect("ensemble traversed a feasible state");
        assert!(is_feasible(&volumes, &best.assignment, tau));
        let q = modularity(&graph, &best.assignment).unwrap();
        if (q - q_star).abs() <= 1e-12 {
            hits += 1;
        }
    }
    assert!(hits >= instances - 1, "only {hits}/{instances} matched");
}

#[test]
fn schedules_ending_penalized_always_leave_a_feasible_best() {
    let mut rng = chain_rng(0x0AC1E, 2);
    for i in 0..10 {
        let p = rng.random_range(5..=7);
        let graph = random_graph(&mut rng, p);
        let volumes = VertexVolumes::new((0..p).map(|_| rng.random_range(1..=5)).collect());
        let total = volumes.total();
        let tau = total / 3;

        let config = exp_config(PenaltySchedule::SwitchAtFold(1), 20, 3);
        let result = run_ensemble(&graph, &volumes, tau, &[config], 16, 300 + i).unwrap();
        assert!(!result.feasible_space_empty);
        let best = result.best_feasible.expect("feasible best exists");
        assert!(is_feasible(&volumes, &best.assignment, tau));
        assert!(result.best_overall.modularity >= best.modularity);
    }
}

#[test]
fn unconstrained_schedule_reports_constant_zero_lambda() {
    let mut rng = chain_rng(0x0AC1E, 3);
    let graph = random_graph(&mut rng, 6);
    let volumes = VertexVolumes::new(vec![1, 0, 0, 0, 0, 1]);
    let config = exp_config(PenaltySchedule::ConstantZero, 10, 2);
    let result = run_ensemble(&graph, &volumes, 3, &[config], 4, 9).unwrap();
    for trace in &result.traces {
        assert!(trace.records.iter().all(|r| r.lambda == 0.0));
    }
}

#[test]
fn traversed_feasible_states_match_enumeration_semantics() {
    // Any state the selection step calls feasible must pass the enumeration
    // oracle's filter, and vice versa for the brute-force feasible count.
    let mut rng = chain_rng(0x0AC1E, 4);
    let p = 6;
    let graph = random_graph(&mut rng, p);
    let volumes = VertexVolumes::new(vec![4, 0, 2, 0, 3, 0]);
    let tau = 3;

    let mut feasible_count = 0u64;
    for_each_partition(p, |labels| {
        if labels_feasible(labels, &volumes, tau) {
            feasible_count += 1;
        }
    });
    assert!(feasible_count > 0);

    let config = exp_config(PenaltySchedule::ConstantOne, 15, 3);
    let result = run_ensemble(&graph, &volumes, tau, &[config], 8, 77).unwrap();
    for trace in &result.traces {
        for (record, snapshot) in trace.records.iter().zip(trace.snapshots.iter()) {
            assert_eq!(
                !record.infeasible,
                labels_feasible(snapshot.labels(), &volumes, tau)
            );
        }
    }
    let _ = Assignment::singletons(p);
}
