//! Exact partition combinatorics and brute-force oracles for small instances:
//! Stirling numbers of the second kind, ordered Bell numbers, feasible
//! assignment counts at a zero volume threshold, restricted-growth-string
//! enumeration of set partitions, and exhaustive modularity optimization.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::{VertexVolumes, WeightedGraph};
use crate::objective::volumes_per_label;
use crate::scalar::Scalar;

/// Largest instance accepted by the exhaustive optimizer.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// `S(n, k)` via the recurrence `S(n,k) = k S(n-1,k) + S(n-1,k-1)`.
pub fn stirling2(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    if n == 0 {
        return BigUint::one(); // k == 0 here
    }
    if k == 0 {
        return BigUint::zero();
    }
    let mut prev = vec![BigUint::zero(); k + 1];
    prev[0] = BigUint::one();
    for _ in 1..=n {
        let mut curr = vec![BigUint::zero(); k + 1];
        for j in 1..=k {
            curr[j] = &prev[j] * BigUint::from(j) + &prev[j - 1];
        }
        curr[0] = BigUint::zero();
        prev = curr;
    }
    prev[k].clone()
}

/// `S(n, k)` through the alternating sum
/// `(1/k!) * sum_j (-1)^(k-j) C(k,j) j^n`; an independent route used to
/// cross-check the recurrence.
pub fn stirling2_alternating(n: usize, k: usize) -> BigUint {
    if k == 0 {
        return if n == 0 { BigUint::one() } else { BigUint::zero() };
    }
    let mut sum = BigInt::zero();
    for j in 0..=k {
        let term = BigInt::from(binomial(k, j)) * BigInt::from(j).pow(n as u32);
        if (k - j) % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let quotient = sum / BigInt::from(factorial(k));
    match quotient.into_parts() {
        (Sign::Minus, _) => unreachable!("Stirling numbers are non-negative"),
        (_, magnitude) => magnitude,
    }
}

/// `n!` as an exact integer.
pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `C(n, k)` as an exact integer.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    for i in 0..k {
        num *= BigUint::from(n - i);
    }
    num / factorial(k)
}

/// Ordered Bell number `sum_{k=1}^{r} S(r,k) k!`: the number of ordered set
/// partitions of `r` elements.
pub fn ordered_bell(r: usize) -> BigUint {
    (1..=r)
        .map(|k| stirling2(r, k) * factorial(k))
        .fold(BigUint::zero(), |acc, t| acc + t)
}

/// Closed-form approximation `r! / (2 (log 2)^(r+1))` to the ordered Bell
/// number.
pub fn ordered_bell_approx(r: usize) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let fact = factorial(r).to_f64().unwrap_or(f64::INFINITY);
    fact / (2.0 * ln2.powi(r as i32 + 1))
}

/// Count of zero-threshold feasible assignments as printed in the source
/// formula: `sum_{k=1}^{r} S(p-r, k) S(r, k) k!` for `p` vertices of which
/// `r` are special.
///
/// This undercounts the semantics of the feasibility indicator (it requires
/// every block to contain a non-special vertex as well); see
/// [`count_feasible_exact`] for the count matching the indicator, and the
/// crate tests for the `(p, r) = (4, 2)` discrepancy.
pub fn count_feasible_paper(p: usize, r: usize) -> Result<BigUint> {
    if r > p {
        return Err(Error::InvalidParameter(format!(
            "special count {r} exceeds vertex count {p}"
        )));
    }
    Ok((1..=r)
        .map(|k| stirling2(p - r, k) * stirling2(r, k) * factorial(k))
        .fold(BigUint::zero(), |acc, t| acc + t))
}

/// Exact count of partitions of `p` labeled vertices, `r` of them special,
/// in which every block contains at least one special vertex:
/// `sum_{k=1}^{r} S(r, k) k^(p-r)`.
///
/// This is the size of the feasible space at a zero volume threshold:
/// partition the specials into `k` non-empty blocks, then send every
/// non-special vertex to one of those blocks.
pub fn count_feasible_exact(p: usize, r: usize) -> Result<BigUint> {
    if r > p {
        return Err(Error::InvalidParameter(format!(
            "special count {r} exceeds vertex count {p}"
        )));
    }
    Ok((1..=r)
        .map(|k| stirling2(r, k) * BigUint::from(k).pow((p - r) as u32))
        .fold(BigUint::zero(), |acc, t| acc + t))
}

/// Natural log of the asymptotic upper bound `r^(p-r) / (2 (log 2)^(r+1))` on
/// the number of zero-threshold feasible assignments.
pub fn feasible_count_bound_ln(p: usize, r: usize) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    (p - r) as f64 * (r as f64).ln() - 2f64.ln() - (r as f64 + 1.0) * ln2.ln()
}

/// Asymptotic bound on the fraction of the label-isomorphism classes that is
/// feasible at a zero threshold:
/// `(sqrt(2 pi) / (2 log 2)) * sqrt(r) / (e log 2)^r`.
pub fn feasible_fraction_bound(r: usize) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let lead = (2.0 * std::f64::consts::PI).sqrt() / (2.0 * ln2);
    lead * (r as f64).sqrt() / (std::f64::consts::E * ln2).powi(r as i32)
}

/// Visits every set partition of `{0, ..., n-1}` exactly once, in
/// lexicographic restricted-growth-string order. The callback receives the
/// canonical label vector (`labels[0] = 0`, each next label at most one past
/// the running maximum).
pub fn for_each_partition<F: FnMut(&[usize])>(n: usize, mut f: F) {
    if n == 0 {
        f(&[]);
        return;
    }
    let mut labels = vec![0usize; n];
    // prefix_max[i] = max(labels[0..=i])
    let mut prefix_max = vec![0usize; n];
    loop {
        f(&labels);
        // Find the rightmost position (> 0) that can still be incremented.
        let mut j = n;
        for i in (1..n).rev() {
            if labels[i] <= prefix_max[i - 1] {
                j = i;
                break;
            }
        }
        if j == n {
            return;
        }
        labels[j] += 1;
        prefix_max[j] = prefix_max[j - 1].max(labels[j]);
        for i in j + 1..n {
            labels[i] = 0;
            prefix_max[i] = prefix_max[j];
        }
    }
}

/// Counts partitions of `p` vertices in which every block contains at least
/// one of the first `r` vertices, by direct enumeration.
pub fn count_feasible_enumerated(p: usize, r: usize) -> Result<BigUint> {
    if r > p {
        return Err(Error::InvalidParameter(format!(
            "special count {r} exceeds vertex count {p}"
        )));
    }
    if p > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            vertices: p,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut count: u64 = 0;
    for_each_partition(p, |labels| {
        let blocks = labels.iter().max().map_or(0, |&m| m + 1);
        let mut has_special = vec![false; blocks];
        for (v, &l) in labels.iter().enumerate() {
            if v < r {
                has_special[l] = true;
            }
        }
        if has_special.iter().all(|&b| b) {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// Modularity evaluated as the literal ordered-pair sum over the dense
/// weight matrix; the independent oracle route, deliberately distinct from
/// the neighbor-list implementation.
fn modularity_dense<T: Scalar>(
    weights: &[Vec<T>],
    degrees: &[T],
    two_m: T,
    labels: &[usize],
) -> T {
    let p = labels.len();
    let mut total = T::zero();
    for u in 0..p {
        for v in 0..p {
            if labels[u] == labels[v] {
                total += weights[u][v] - degrees[u] * degrees[v] / two_m;
            }
        }
    }
    total / two_m
}

/// Exhaustively maximizes modularity over all set partitions, optionally
/// restricted to assignments whose every community volume exceeds `tau`.
/// Returns `Ok(None)` when the constrained search has an empty feasible set.
/// Ties go to the first maximizer in enumeration order.
pub fn brute_force_optimum<T: Scalar>(
    graph: &WeightedGraph<T>,
    volumes: &VertexVolumes,
    tau: u64,
    constrained: bool,
) -> Result<Option<(Assignment, T)>> {
    let p = graph.vertex_count();
    if p > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            vertices: p,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let two_m = graph.total_weight();
    if two_m <= T::zero() {
        return Err(Error::ZeroTotalWeight);
    }
    let mut weights = vec![vec![T::zero(); p]; p];
    for u in 0..p {
        for &(v, w) in graph.neighbors(u) {
            weights[u][v] = w;
            weights[v][u] = w;
        }
    }
    let degrees = graph.degrees().to_vec();

    let mut best: Option<(Vec<usize>, T)> = None;
    for_each_partition(p, |labels| {
        if constrained {
            let blocks = labels.iter().max().map_or(0, |&m| m + 1);
            let mut totals = vec![0u64; blocks];
            for (v, &l) in labels.iter().enumerate() {
                totals[l] += volumes.volume(v);
            }
            if totals.iter().any(|&t| t <= tau) {
                return;
            }
        }
        let q = modularity_dense(&weights, &degrees, two_m, labels);
        match &best {
            Some((_, best_q)) if q <= *best_q => {}
            _ => best = Some((labels.to_vec(), q)),
        }
    });
    Ok(best.map(|(labels, q)| (Assignment::new(labels).expect("canonical labels"), q)))
}

/// Feasibility of a label vector against integer volumes, for enumeration
/// callers that work with raw restricted-growth strings.
pub fn labels_feasible(labels: &[usize], volumes: &VertexVolumes, tau: u64) -> bool {
    let assignment = Assignment::new(labels.to_vec()).expect("labels in range");
    let totals = volumes_per_label(volumes, &assignment);
    assignment.unique_labels().iter().all(|&l| totals[l] > tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stirling_boundaries() {
        assert_eq!(stirling2(0, 0), BigUint::one());
        for n in 1..=8usize {
            assert_eq!(stirling2(n, 1), BigUint::one());
            assert_eq!(stirling2(n, n), BigUint::one());
            assert_eq!(stirling2(n, 0), BigUint::zero());
            assert_eq!(stirling2(n, n + 1), BigUint::zero());
        }
    }

    #[test]
    fn stirling_small_values() {
        assert_eq!(stirling2(4, 2), BigUint::from(7u32));
        assert_eq!(stirling2(5, 3), BigUint::from(25u32));
        assert_eq!(stirling2_alternating(5, 3), BigUint::from(25u32));
    }

    #[test]
    fn recurrence_matches_alternating_sum() {
        for n in 0..=20 {
            for k in 0..=n {
                assert_eq!(stirling2(n, k), stirling2_alternating(n, k), "S({n},{k})");
            }
        }
    }

    #[test]
    fn ordered_bell_values() {
        assert_eq!(ordered_bell(1), BigUint::from(1u32));
        assert_eq!(ordered_bell(2), BigUint::from(3u32));
        assert_eq!(ordered_bell(3), BigUint::from(13u32));
        assert_eq!(ordered_bell(10), BigUint::from(102247563u64));
    }

    #[test]
    fn ordered_bell_approximation_within_one_percent() {
        let exact = ordered_bell(10).to_f64().unwrap();
        let approx = ordered_bell_approx(10);
        assert!((exact / approx - 1.0).abs() < 0.01);
    }

    #[test]
    fn feasible_count_examples() {
        assert_eq!(count_feasible_paper(3, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(count_feasible_paper(4, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(count_feasible_paper(3, 2).unwrap(), BigUint::from(1u32));

        assert_eq!(count_feasible_exact(3, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(count_feasible_exact(4, 2).unwrap(), BigUint::from(5u32));
        assert_eq!(count_feasible_exact(3, 2).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn exact_count_matches_enumeration() {
        for p in 0..=8 {
            for r in 0..=p {
                let enumerated = count_feasible_enumerated(p, r).unwrap();
                if r == 0 {
                    // No block can contain a special vertex, so only the empty
                    // partition qualifies.
                    let expected = if p == 0 { 1u32 } else { 0u32 };
                    assert_eq!(enumerated, BigUint::from(expected));
                    continue;
                }
                assert_eq!(
                    count_feasible_exact(p, r).unwrap(),
                    enumerated,
                    "p={p} r={r}"
                );
            }
        }
    }

    #[test]
    fn printed_formula_undercounts_at_4_2() {
        let paper = count_feasible_paper(4, 2).unwrap();
        let exact = count_feasible_exact(4, 2).unwrap();
        assert_eq!(paper, BigUint::from(3u32));
        assert_eq!(exact, BigUint::from(5u32));
        assert!(paper < exact);
        for p in 0..=10 {
            for r in 0..=p {
                assert!(
                    count_feasible_paper(p, r).unwrap() <= count_feasible_exact(p, r).unwrap(),
                    "p={p} r={r}"
                );
            }
        }
    }

    #[test]
    fn partition_enumeration_counts_are_bell_numbers() {
        let bell = [1u64, 1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, &expected) in bell.iter().enumerate() {
            let mut count = 0u64;
            for_each_partition(n, |_| count += 1);
            assert_eq!(count, expected, "n={n}");
        }
    }

    #[test]
    fn partition_enumeration_is_lexicographic_and_canonical() {
        let mut seen = Vec::new();
        for_each_partition(4, |labels| seen.push(labels.to_vec()));
        assert_eq!(seen.first().unwrap(), &vec![0, 0, 0, 0]);
        assert_eq!(seen.last().unwrap(), &vec![0, 1, 2, 3]);
        for window in seen.windows(2) {
            assert!(window[0] < window[1]);
        }
        for labels in &seen {
            assert_eq!(labels[0], 0);
            let mut max = 0;
            for &l in labels {
                assert!(l <= max + 1);
                max = max.max(l);
            }
        }
    }

    #[test]
    fn brute_force_unit_triangle() {
        let g = WeightedGraph::from_edge_list(&[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)], 3).unwrap();
        let (x, q) = brute_force_optimum(&g, &VertexVolumes::zero(3), 0, false)
            .unwrap()
            .unwrap();
        assert_eq!(x.community_count(), 1);
        assert_abs_diff_eq!(q, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn brute_force_barbell() {
        let g = WeightedGraph::from_edge_list(
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
        .unwrap();
        let (x, q) = brute_force_optimum(&g, &VertexVolumes::zero(6), 0, false)
            .unwrap()
            .unwrap();
        assert_eq!(x.labels(), &[0, 0, 0, 1, 1, 1]);
        assert_abs_diff_eq!(q, 5.0 / 14.0, epsilon = 1e-15);

        // One special vertex per triangle, threshold forcing them together.
        let vols = VertexVolumes::new(vec![9, 0, 0, 0, 0, 9]);
        let (x, q) = brute_force_optimum(&g, &vols, 10, true).unwrap().unwrap();
        assert_eq!(x.community_count(), 1);
        assert_abs_diff_eq!(q, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn brute_force_reports_empty_feasible_set() {
        let g = WeightedGraph::from_edge_list(&[(0, 1, 1.0)], 2).unwrap();
        let vols = VertexVolumes::new(vec![1, 1]);
        assert!(brute_force_optimum(&g, &vols, 5, true).unwrap().is_none());
    }

    #[test]
    fn brute_force_rejects_large_instances() {
        let edges: Vec<(usize, usize, f64)> = (0..13).map(|i| (i, (i + 1) % 13, 1.0)).collect();
        let g = WeightedGraph::from_edge_list(&edges, 13).unwrap();
        assert!(matches!(
            brute_force_optimum(&g, &VertexVolumes::zero(13), 0, false),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn asymptotic_bounds_behave() {
        // The log-scale count bound grows in p and the feasible-fraction
        // bound decays in r; both stay finite where the exact values
        // overflow f64.
        assert!(feasible_count_bound_ln(60, 5) < feasible_count_bound_ln(80, 5));
        assert!(feasible_count_bound_ln(4000, 30).is_finite());
        let exact_ln = count_feasible_exact(40, 6)
            .unwrap()
            .to_f64()
            .unwrap()
            .ln();
        let bound_ln = feasible_count_bound_ln(40, 6);
        assert!(exact_ln <= bound_ln + 1e-9);
        assert!(feasible_fraction_bound(8) > feasible_fraction_bound(12));
        assert!(feasible_fraction_bound(30) < 1e-6);
    }

    #[test]
    fn feasibility_is_invariant_under_modulo_shift() {
        // x and (x + 1 mod p) describe the same partition.
        let volumes = VertexVolumes::new(vec![3, 0, 5, 1]);
        for_each_partition(4, |labels| {
            let shifted: Vec<usize> = labels.iter().map(|&l| (l + 1) % 4).collect();
            for tau in [0, 2, 4, 9] {
                assert_eq!(
                    labels_feasible(labels, &volumes, tau),
                    labels_feasible(&shifted, &volumes, tau)
                );
            }
        });
    }
}
