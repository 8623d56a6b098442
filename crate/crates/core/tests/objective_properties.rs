//! Property tests for the objective functions.

use proptest::prelude::*;

use concord_core::combinatorics::brute_force_optimum;
use concord_core::objective::{
    community_volume, conditional_log_weight, hamiltonian, is_feasible, modularity,
    normalize_log_weights, PenaltyContext,
};
use concord_core::{Assignment, Graph64, VertexVolumes};

/// Graph on `p` vertices from a dense boolean mask and integer weights.
fn graph_from_mask(p: usize, mask: &[bool], weights: &[u8]) -> Option<Graph64> {
    let mut edges = Vec::new();
    let mut k = 0;
    for u in 0..p {
        for v in u..p {
            if mask[k % mask.len()] {
                edges.push((u, v, (weights[k % weights.len()] % 3 + 1) as f64));
            }
            k += 1;
        }
    }
    if edges.is_empty() {
        return None;
    }
    Some(Graph64::from_edge_list(&edges, p).unwrap())
}

fn arb_instance() -> impl Strategy<Value = (Graph64, Assignment)> {
    (2usize..9)
        .prop_flat_map(|p| {
            (
                Just(p),
                proptest::collection::vec(any::<bool>(), 36),
                proptest::collection::vec(any::<u8>(), 36),
                proptest::collection::vec(0usize..p, p),
            )
        })
        .prop_filter_map("graph must carry weight", |(p, mask, weights, labels)| {
            let graph = graph_from_mask(p, &mask, &weights)?;
            let assignment = Assignment::new(labels).ok()?;
            Some((graph, assignment))
        })
}

proptest! {
    #[test]
    fn modularity_is_bounded((graph, assignment) in arb_instance()) {
        let q = modularity(&graph, &assignment).unwrap();
        prop_assert!((-1.0..=1.0).contains(&q));
    }

    #[test]
    fn modularity_is_relabeling_invariant(
        (graph, assignment) in arb_instance(),
        shift in 1usize..7,
    ) {
        let p = assignment.len();
        let relabeled: Vec<usize> =
            assignment.labels().iter().map(|&l| (l + shift) % p).collect();
        let relabeled = Assignment::new(relabeled).unwrap();
        let q = modularity(&graph, &assignment).unwrap();
        let q_shifted = modularity(&graph, &relabeled).unwrap();
        prop_assert_eq!(q, q_shifted);
    }

    #[test]
    fn shared_label_means_shared_volume(
        (graph, assignment) in arb_instance(),
        volumes in proptest::collection::vec(0u64..9, 9),
    ) {
        let p = assignment.len();
        let volumes = VertexVolumes::new(volumes[..p].to_vec());
        let _ = &graph;
        for u in 0..p {
            for v in 0..p {
                if assignment.label(u) == assignment.label(v) {
                    prop_assert_eq!(
                        community_volume(&volumes, &assignment, u),
                        community_volume(&volumes, &assignment, v)
                    );
                }
            }
        }
    }

    #[test]
    fn conditional_weights_normalize(
        (graph, assignment) in arb_instance(),
        v_pick in any::<proptest::sample::Index>(),
        theta in 0.1f64..8.0,
    ) {
        let p = assignment.len();
        let v = v_pick.index(p);
        let volumes = VertexVolumes::new((0..p as u64).collect());
        let ctx = PenaltyContext::new(&graph, 1, 1.0).unwrap();
        let weights: Vec<f64> = assignment
            .unique_labels()
            .into_iter()
            .map(|c| conditional_log_weight(&graph, &volumes, &assignment, v, c, &ctx, theta).unwrap())
            .collect();
        let probs = normalize_log_weights(&weights);
        let total: f64 = probs.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }
}

/// On a battery of zero-threshold instances, the penalized Hamiltonian of
/// every infeasible assignment stays below the best feasible modularity, so
/// turning the penalty on can never promote an infeasible optimum. (With
/// larger thresholds the per-vertex weights do not guarantee this in
/// general; the selection step only ever reports feasible states, so
/// correctness does not rest on it.)
#[test]
fn penalty_demotes_infeasible_assignments_at_tau_zero() {
    use concord_core::combinatorics::for_each_partition;

    let instances: Vec<(Graph64, VertexVolumes)> = vec![
        (
            Graph64::from_edge_list(&[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 1.0)], 4)
                .unwrap(),
            VertexVolumes::new(vec![2, 0, 3, 0]),
        ),
        (
            Graph64::from_edge_list(
                &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 2.0), (2, 4, 1.0)],
                5,
            )
            .unwrap(),
            VertexVolumes::new(vec![1, 0, 0, 0, 1]),
        ),
        (
            Graph64::from_edge_list(
                &[
                    (0, 1, 1.0),
                    (0, 2, 1.0),
                    (1, 2, 1.0),
                    (3, 4, 1.0),
                    (3, 5, 1.0),
                    (4, 5, 1.0),
                    (2, 3, 1.0),
                ],
                6,
            )
            .unwrap(),
            VertexVolumes::new(vec![1, 0, 0, 1, 0, 0]),
        ),
    ];

    for (graph, volumes) in &instances {
        let tau = 0;
        let (_, best_feasible_q) = brute_force_optimum(graph, volumes, tau, true)
            .unwrap()
            .expect("feasible partition exists");
        let ctx = PenaltyContext::new(graph, tau, 1.0).unwrap();
        let p = graph.vertex_count();
        for_each_partition(p, |labels| {
            let assignment = Assignment::new(labels.to_vec()).unwrap();
            if is_feasible(volumes, &assignment, tau) {
                return;
            }
            let h = hamiltonian(graph, volumes, &assignment, &ctx).unwrap();
            assert!(
                h < best_feasible_q,
                "infeasible {labels:?} has H = {h} >= {best_feasible_q}"
            );
        });
    }
}

// The penalized Hamiltonian must agree with modularity minus the explicit
// penalty sum on random assignments.
proptest! {
    #[test]
    fn hamiltonian_decomposition(
        (graph, assignment) in arb_instance(),
        volumes in proptest::collection::vec(0u64..9, 9),
        tau in 0u64..10,
    ) {
        let p = assignment.len();
        let volumes = VertexVolumes::new(volumes[..p].to_vec());
        let ctx = PenaltyContext::new(&graph, tau, 1.0).unwrap();
        let h = hamiltonian(&graph, &volumes, &assignment, &ctx).unwrap();
        let q = modularity(&graph, &assignment).unwrap();
        let mut field = 0.0;
        for v in 0..p {
            if community_volume(&volumes, &assignment, v) <= tau {
                field += ctx.lambda_v(v);
            }
        }
        prop_assert!((h - (q - field)).abs() <= 1e-12);
    }
}
