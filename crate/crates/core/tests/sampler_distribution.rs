//! The resampling step must draw labels with the probabilities given by the
//! normalized conditional weights.

use concord_core::objective::{conditional_log_weight, normalize_log_weights, PenaltyContext};
use concord_core::sampler::{resample_vertex, SamplerOptions, SweepState};
use concord_core::{chain_rng, Assignment, Graph64, VertexVolumes};

#[test]
fn empirical_label_frequencies_match_conditionals() {
    let graph =
        Graph64::from_edge_list(&[(0, 1, 2.0), (1, 2, 1.0), (0, 2, 1.0)], 3).unwrap();
    let volumes = VertexVolumes::new(vec![3, 0, 4]);
    let ctx = PenaltyContext::new(&graph, 3, 1.0).unwrap();
    let assignment = Assignment::new(vec![0, 0, 1]).unwrap();
    let theta = 1.5;
    let v = 1;

    let candidates = assignment.unique_labels();
    let log_weights: Vec<f64> = candidates
        .iter()
        .map(|&c| conditional_log_weight(&graph, &volumes, &assignment, v, c, &ctx, theta).unwrap())
        .collect();
    let expected = normalize_log_weights(&log_weights);

    let cap = 1e30;
    let draws = 100_000u64;
    let mut counts = vec![0u64; candidates.len()];
    for i in 0..draws {
        let mut state =
            SweepState::new(&graph, &volumes, assignment.clone(), chain_rng(0xD157, i)).unwrap();
        resample_vertex(
            &mut state,
            &graph,
            &volumes,
            &ctx,
            theta,
            cap,
            v,
            &SamplerOptions::default(),
        );
        let drawn = state.assignment().label(v);
        let slot = candidates.iter().position(|&c| c == drawn).unwrap();
        counts[slot] += 1;
    }

    for (slot, &c) in candidates.iter().enumerate() {
        let empirical = counts[slot] as f64 / draws as f64;
        let p = expected[slot];
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!(
            (empirical - p).abs() <= 3.0 * se,
            "label {c}: empirical {empirical}, expected {p}, se {se}"
        );
    }
}
