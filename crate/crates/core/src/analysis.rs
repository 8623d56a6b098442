//! Post-hoc comparison of two community assignments: per-vertex Jaccard
//! stability, vertex-pair co-membership classes, per-community volume
//! distributions, and the community-overlap bipartite structure.

use std::collections::BTreeMap;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::VertexVolumes;
use crate::scalar::Scalar;

/// Counts of unordered vertex pairs co-assigned in at least one of the two
/// assignments, split by where they are co-assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairClasses {
    pub both: u64,
    pub only_a: u64,
    pub only_b: u64,
}

impl PairClasses {
    pub fn total(&self) -> u64 {
        self.both + self.only_a + self.only_b
    }
}

/// Shared-vertex count between one community of `a` and one of `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapEdge {
    pub community_a: usize,
    pub community_b: usize,
    pub shared: usize,
}

/// Comparison summary between two assignments over the same vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<T> {
    pub jaccard: Vec<T>,
    pub pair_classes: PairClasses,
    /// Sorted per-community volume totals of each assignment.
    pub volume_totals_a: Vec<u64>,
    pub volume_totals_b: Vec<u64>,
    pub overlap_edges: Vec<OverlapEdge>,
    pub mean_community_size_a: T,
    pub mean_community_size_b: T,
}

fn check_lengths(a: &Assignment, b: &Assignment) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::AssignmentLength {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// Contingency counts keyed by `(label in a, label in b)`, plus community
/// sizes per assignment.
fn contingency(a: &Assignment, b: &Assignment) -> (BTreeMap<(usize, usize), usize>, Vec<usize>, Vec<usize>) {
    let p = a.len();
    let mut cells: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut size_a = vec![0usize; p];
    let mut size_b = vec![0usize; p];
    for v in 0..p {
        *cells.entry((a.label(v), b.label(v))).or_insert(0) += 1;
        size_a[a.label(v)] += 1;
        size_b[b.label(v)] += 1;
    }
    (cells, size_a, size_b)
}

/// Jaccard index, per vertex, of the vertex's community in `a` against its
/// community in `b`: intersection size over union size. The vertex itself
/// belongs to both, so the value lies in `(0, 1]`.
pub fn jaccard_per_vertex<T: Scalar>(a: &Assignment, b: &Assignment) -> Result<Vec<T>> {
    check_lengths(a, b)?;
    let (cells, size_a, size_b) = contingency(a, b);
    Ok((0..a.len())
        .map(|v| {
            let shared = cells[&(a.label(v), b.label(v))];
            let union = size_a[a.label(v)] + size_b[b.label(v)] - shared;
            T::from_u64_lossy(shared as u64) / T::from_u64_lossy(union as u64)
        })
        .collect())
}

fn pairs(n: usize) -> u64 {
    let n = n as u64;
    n.saturating_sub(1) * n / 2
}

/// Classifies unordered vertex pairs co-assigned in `a`, `b`, or both.
/// Computed from per-community incidence counts rather than a pairwise loop.
pub fn pair_comembership_classes(a: &Assignment, b: &Assignment) -> Result<PairClasses> {
    check_lengths(a, b)?;
    let (cells, size_a, size_b) = contingency(a, b);
    let both: u64 = cells.values().map(|&n| pairs(n)).sum();
    let pairs_a: u64 = size_a.iter().map(|&n| pairs(n)).sum();
    let pairs_b: u64 = size_b.iter().map(|&n| pairs(n)).sum();
    Ok(PairClasses {
        both,
        only_a: pairs_a - both,
        only_b: pairs_b - both,
    })
}

/// Sorted volume totals of the live communities of `assignment`.
pub fn community_volume_totals(volumes: &VertexVolumes, assignment: &Assignment) -> Vec<u64> {
    let mut totals: BTreeMap<usize, u64> = BTreeMap::new();
    for (v, &l) in assignment.labels().iter().enumerate() {
        *totals.entry(l).or_insert(0) += volumes.volume(v);
    }
    let mut out: Vec<u64> = totals.into_values().collect();
    out.sort_unstable();
    out
}

/// Fraction of communities whose volume total is at most `tau`.
pub fn fraction_at_most(totals: &[u64], tau: u64) -> f64 {
    if totals.is_empty() {
        return 0.0;
    }
    totals.iter().filter(|&&t| t <= tau).count() as f64 / totals.len() as f64
}

/// Builds the full comparison report.
pub fn compare<T: Scalar>(
    a: &Assignment,
    b: &Assignment,
    volumes: &VertexVolumes,
) -> Result<ComparisonReport<T>> {
    check_lengths(a, b)?;
    if volumes.len() != a.len() {
        return Err(Error::AssignmentLength {
            expected: a.len(),
            actual: volumes.len(),
        });
    }
    let (cells, _, _) = contingency(a, b);
    let overlap_edges = cells
        .iter()
        .map(|(&(ca, cb), &shared)| OverlapEdge {
            community_a: ca,
            community_b: cb,
            shared,
        })
        .collect();
    let p = T::from_u64_lossy(a.len() as u64);
    Ok(ComparisonReport {
        jaccard: jaccard_per_vertex(a, b)?,
        pair_classes: pair_comembership_classes(a, b)?,
        volume_totals_a: community_volume_totals(volumes, a),
        volume_totals_b: community_volume_totals(volumes, b),
        overlap_edges,
        mean_community_size_a: p / T::from_u64_lossy(a.community_count() as u64),
        mean_community_size_b: p / T::from_u64_lossy(b.community_count() as u64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_assignments_have_unit_jaccard() {
        let a = Assignment::new(vec![0, 0, 1, 1]).unwrap();
        let j: Vec<f64> = jaccard_per_vertex(&a, &a).unwrap();
        assert!(j.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn coarse_versus_singletons_jaccard() {
        let a = Assignment::all_in_one(4);
        let b = Assignment::singletons(4);
        let j: Vec<f64> = jaccard_per_vertex(&a, &b).unwrap();
        assert!(j.iter().all(|&x| x == 0.25));
    }

    #[test]
    fn hand_built_jaccard_values() {
        let a = Assignment::new(vec![0, 0, 1, 1]).unwrap();
        let b = Assignment::new(vec![0, 0, 0, 1]).unwrap();
        let j: Vec<f64> = jaccard_per_vertex(&a, &b).unwrap();
        // v2: {2,3} vs {0,1,2} share {2}, union has 4 members.
        assert_abs_diff_eq!(j[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j[2], 1.0 / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j[3], 1.0 / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn jaccard_is_symmetric() {
        let a = Assignment::new(vec![0, 0, 1, 1, 2, 2]).unwrap();
        let b = Assignment::new(vec![0, 1, 1, 2, 2, 2]).unwrap();
        let ab: Vec<f64> = jaccard_per_vertex(&a, &b).unwrap();
        let ba: Vec<f64> = jaccard_per_vertex(&b, &a).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn pair_classes_examples() {
        let a = Assignment::new(vec![0, 0, 1, 1]).unwrap();
        let classes = pair_comembership_classes(&a, &a).unwrap();
        assert_eq!((classes.both, classes.only_a, classes.only_b), (2, 0, 0));

        let b = Assignment::all_in_one(4);
        let classes = pair_comembership_classes(&a, &b).unwrap();
        assert_eq!((classes.both, classes.only_a, classes.only_b), (2, 0, 4));

        let s = Assignment::singletons(4);
        let classes = pair_comembership_classes(&s, &s).unwrap();
        assert_eq!(classes.total(), 0);
    }

    #[test]
    fn refinement_has_no_only_b_pairs() {
        // b refines a: every b-community sits inside one a-community.
        let a = Assignment::new(vec![0, 0, 0, 3, 3]).unwrap();
        let b = Assignment::new(vec![0, 0, 2, 3, 4]).unwrap();
        let classes = pair_comembership_classes(&a, &b).unwrap();
        assert_eq!(classes.only_b, 0);
        assert!(classes.only_a > 0);
    }

    #[test]
    fn volume_totals_and_fraction() {
        let f = VertexVolumes::new(vec![3, 0, 5]);
        let x = Assignment::new(vec![0, 0, 1]).unwrap();
        let totals = community_volume_totals(&f, &x);
        assert_eq!(totals, vec![3, 5]);
        assert_abs_diff_eq!(fraction_at_most(&totals, 4), 0.5, epsilon = 1e-15);

        let one = Assignment::all_in_one(3);
        assert_eq!(community_volume_totals(&f, &one), vec![8]);
    }

    #[test]
    fn report_overlap_edges_have_positive_shares() {
        let a = Assignment::new(vec![0, 0, 1, 1, 2, 2]).unwrap();
        let b = Assignment::new(vec![0, 1, 1, 2, 2, 2]).unwrap();
        let volumes = VertexVolumes::new(vec![1, 2, 3, 4, 5, 6]);
        let report: ComparisonReport<f64> = compare(&a, &b, &volumes).unwrap();
        assert!(report.overlap_edges.iter().all(|e| e.shared >= 1));
        let shared_total: usize = report.overlap_edges.iter().map(|e| e.shared).sum();
        assert_eq!(shared_total, 6);
        assert_abs_diff_eq!(report.mean_community_size_a, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(report.mean_community_size_b, 2.0, epsilon = 1e-15);
        assert_eq!(
            report.pair_classes.total(),
            report.pair_classes.both + report.pair_classes.only_a + report.pair_classes.only_b
        );
    }

    #[test]
    fn rejects_length_mismatch() {
        let a = Assignment::singletons(3);
        let b = Assignment::singletons(4);
        assert!(jaccard_per_vertex::<f64>(&a, &b).is_err());
        assert!(pair_comembership_classes(&a, &b).is_err());
    }
}
