//! Weighted undirected graphs, per-vertex volumes, and the folding
//! (coarsening) procedure that contracts each community into a single vertex.

use std::collections::BTreeMap;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Symmetric weighted graph with non-negative edge weights. Self-loops are
/// permitted and their weight counts once toward the vertex degree, i.e.
/// `d_u = sum_v W_uv` over the row of the weighted adjacency matrix.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    /// Neighbor lists sorted by neighbor index. A self-loop appears once in
    /// its own row as `(v, w)`.
    adjacency: Vec<Vec<(usize, T)>>,
    degrees: Vec<T>,
    /// `2m`, the sum of all degrees.
    total_weight: T,
}

impl<T: Scalar> WeightedGraph<T> {
    /// Builds a graph from `(u, v, w)` triples. Duplicate entries for the
    /// same unordered pair (including reversed order) are summed.
    pub fn from_edge_list(edges: &[(usize, usize, T)], vertex_count: usize) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for &(u, v, w) in edges {
            if u >= vertex_count {
                return Err(Error::VertexOutOfRange {
                    index: u,
                    count: vertex_count,
                });
            }
            if v >= vertex_count {
                return Err(Error::VertexOutOfRange {
                    index: v,
                    count: vertex_count,
                });
            }
            if w < T::zero() {
                return Err(Error::NegativeWeight { u, v });
            }
            let key = (u.min(v), u.max(v));
            *acc.entry(key).or_insert_with(T::zero) += w;
        }
        let mut adjacency: Vec<Vec<(usize, T)>> = vec![Vec::new(); vertex_count];
        for (&(u, v), &w) in &acc {
            adjacency[u].push((v, w));
            if u != v {
                adjacency[v].push((u, w));
            }
        }
        for row in &mut adjacency {
            row.sort_unstable_by_key(|&(v, _)| v);
        }
        let degrees: Vec<T> = adjacency
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect();
        let total_weight = degrees.iter().copied().sum();
        Ok(Self {
            adjacency,
            degrees,
            total_weight,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    /// `d_v`: the row sum of the weighted adjacency matrix at `v`.
    pub fn degree(&self, v: usize) -> T {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[T] {
        &self.degrees
    }

    /// `2m`, the total weight of the network.
    pub fn total_weight(&self) -> T {
        self.total_weight
    }

    /// `m`, half the total weight.
    pub fn half_total_weight(&self) -> T {
        self.total_weight / T::from_f64_lossy(2.0)
    }

    /// Neighbor entries of `v`, including the self-loop entry if present.
    pub fn neighbors(&self, v: usize) -> &[(usize, T)] {
        &self.adjacency[v]
    }

    /// `W_vv`, zero when no self-loop is present.
    pub fn self_loop(&self, v: usize) -> T {
        self.adjacency[v]
            .binary_search_by_key(&v, |&(u, _)| u)
            .map(|i| self.adjacency[v][i].1)
            .unwrap_or_else(|_| T::zero())
    }

    /// Number of stored undirected edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.adjacency
            .iter()
            .enumerate()
            .map(|(u, row)| row.iter().filter(|&&(v, _)| v >= u).count())
            .sum()
    }

    /// Edges as `(u, v, w)` triples with `u <= v`, in lexicographic order.
    pub fn edge_triples(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for (u, row) in self.adjacency.iter().enumerate() {
            for &(v, w) in row {
                if v >= u {
                    out.push((u, v, w));
                }
            }
        }
        out
    }
}

/// The volume function `f`: a non-negative integer per vertex. Vertices with
/// positive volume form the special set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexVolumes {
    volumes: Vec<u64>,
}

impl VertexVolumes {
    pub fn new(volumes: Vec<u64>) -> Self {
        Self { volumes }
    }

    /// All-zero volumes for `p` vertices.
    pub fn zero(p: usize) -> Self {
        Self {
            volumes: vec![0; p],
        }
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    pub fn volume(&self, v: usize) -> u64 {
        self.volumes[v]
    }

    pub fn volumes(&self) -> &[u64] {
        &self.volumes
    }

    /// Indices with positive volume, ascending.
    pub fn special_set(&self) -> Vec<usize> {
        self.volumes
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f > 0)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn is_special(&self, v: usize) -> bool {
        self.volumes[v] > 0
    }

    pub fn total(&self) -> u64 {
        self.volumes.iter().sum()
    }
}

/// Records how a fold contracted vertices, so community labels found on the
/// folded graph can be carried back to the vertices of the input graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldMap {
    /// Input-graph vertex -> folded vertex.
    parent: Vec<usize>,
    /// Community label of the input assignment -> folded vertex, `None` for
    /// labels that were not live.
    label_to_folded: Vec<Option<usize>>,
}

impl FoldMap {
    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    pub fn folded_vertex_of_label(&self, label: usize) -> Option<usize> {
        self.label_to_folded.get(label).copied().flatten()
    }

    /// Carries an assignment on the folded graph back to the input graph.
    pub fn unfold(&self, folded: &Assignment) -> Assignment {
        let labels = self.parent.iter().map(|&fv| folded.label(fv)).collect();
        // Folded labels are < folded vertex count <= input vertex count.
        Assignment::new(labels).expect("unfolded labels are in range")
    }

    /// Composes `self` (applied first) with a subsequent fold.
    pub fn compose(&self, next: &FoldMap) -> FoldMap {
        FoldMap {
            parent: self.parent.iter().map(|&fv| next.parent(fv)).collect(),
            label_to_folded: self
                .label_to_folded
                .iter()
                .map(|slot| slot.map(|fv| next.parent(fv)))
                .collect(),
        }
    }

    /// Identity map on `p` vertices.
    pub fn identity(p: usize) -> FoldMap {
        FoldMap {
            parent: (0..p).collect(),
            label_to_folded: (0..p).map(Some).collect(),
        }
    }
}

/// Contracts each community of `assignment` into a single vertex.
///
/// The folded weight between communities is the sum of all original weights
/// between their members; the folded self-weight of a community is the full
/// submatrix sum over its members, so each internal undirected edge counts
/// twice and each internal self-loop once. Modularity and feasibility of the
/// input partition are preserved as the singleton partition on the folded
/// graph, and the folded volume of a community is the sum of its members'
/// volumes.
///
/// Folded vertices are indexed by first appearance of their label in the
/// input assignment.
pub fn fold<T: Scalar>(
    graph: &WeightedGraph<T>,
    volumes: &VertexVolumes,
    assignment: &Assignment,
) -> Result<(WeightedGraph<T>, VertexVolumes, FoldMap)> {
    let p = graph.vertex_count();
    if assignment.len() != p {
        return Err(Error::AssignmentLength {
            expected: p,
            actual: assignment.len(),
        });
    }
    if volumes.len() != p {
        return Err(Error::AssignmentLength {
            expected: p,
            actual: volumes.len(),
        });
    }

    // Folded index per label, by first appearance.
    let mut label_to_folded: Vec<Option<usize>> = vec![None; p];
    let mut folded_count = 0;
    let mut parent = Vec::with_capacity(p);
    for v in 0..p {
        let l = assignment.label(v);
        let fv = *label_to_folded[l].get_or_insert_with(|| {
            let fv = folded_count;
            folded_count += 1;
            fv
        });
        parent.push(fv);
    }

    // Accumulate undirected folded edges; each original undirected edge is
    // visited once (u <= v), so sums are order-deterministic.
    let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
    for u in 0..p {
        for &(v, w) in graph.neighbors(u) {
            if v < u {
                continue;
            }
            let (i, j) = (parent[u], parent[v]);
            let key = (i.min(j), i.max(j));
            let entry = acc.entry(key).or_insert_with(T::zero);
            // Internal u != v edges appear twice in the community submatrix.
            if i == j && u != v {
                *entry += w + w;
            } else {
                *entry += w;
            }
        }
    }
    let edges: Vec<(usize, usize, T)> = acc.into_iter().map(|((i, j), w)| (i, j, w)).collect();
    let folded_graph = WeightedGraph::from_edge_list(&edges, folded_count)?;

    let mut folded_volumes = vec![0u64; folded_count];
    for v in 0..p {
        folded_volumes[parent[v]] += volumes.volume(v);
    }

    Ok((
        folded_graph,
        VertexVolumes::new(folded_volumes),
        FoldMap {
            parent,
            label_to_folded,
        },
    ))
}
