//! Objective and constraint functions: modularity, community volumes,
//! feasibility indicators, per-vertex penalty weights, the penalized
//! Hamiltonian, and the conditional label weights that drive resampling.
//!
//! All functions here are pure; the sampler maintains incremental caches that
//! must agree with these reference computations.

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::{VertexVolumes, WeightedGraph};
use crate::scalar::Scalar;

/// Penalty configuration: the volume threshold `tau`, the global multiplier
/// `lambda`, and the precomputed per-vertex weights
/// `lambda_v = |W_vv - d_v^2 / 2m| / m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyContext<T> {
    tau: u64,
    lambda: T,
    lambda_v: Vec<T>,
}

impl<T: Scalar> PenaltyContext<T> {
    pub fn new(graph: &WeightedGraph<T>, tau: u64, lambda: T) -> Result<Self> {
        if lambda < T::zero() {
            return Err(Error::InvalidParameter(
                "penalty multiplier must be non-negative".into(),
            ));
        }
        let two_m = graph.total_weight();
        if two_m <= T::zero() {
            return Err(Error::ZeroTotalWeight);
        }
        let m = graph.half_total_weight();
        let lambda_v = (0..graph.vertex_count())
            .map(|v| {
                let d = graph.degree(v);
                ((graph.self_loop(v) - d * d / two_m) / m).abs()
            })
            .collect();
        Ok(Self {
            tau,
            lambda,
            lambda_v,
        })
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// `lambda_v`, the penalty weight of vertex `v`.
    pub fn lambda_v(&self, v: usize) -> T {
        self.lambda_v[v]
    }

    pub fn lambda_weights(&self) -> &[T] {
        &self.lambda_v
    }

    /// Same threshold and weights with a different global multiplier.
    pub fn with_lambda(&self, lambda: T) -> Self {
        Self {
            tau: self.tau,
            lambda,
            lambda_v: self.lambda_v.clone(),
        }
    }
}

fn check_assignment<T: Scalar>(graph: &WeightedGraph<T>, assignment: &Assignment) -> Result<()> {
    if assignment.len() != graph.vertex_count() {
        return Err(Error::AssignmentLength {
            expected: graph.vertex_count(),
            actual: assignment.len(),
        });
    }
    Ok(())
}

/// Modularity `Q(x|G)`: the ordered-pair sum, diagonal included, of
/// `(W_uv - d_u d_v / 2m) / 2m` over pairs sharing a label.
///
/// Evaluated per community through neighbor lists: the weight part scans each
/// vertex's edges, the null-model part uses per-community degree totals.
pub fn modularity<T: Scalar>(graph: &WeightedGraph<T>, assignment: &Assignment) -> Result<T> {
    check_assignment(graph, assignment)?;
    let two_m = graph.total_weight();
    if two_m <= T::zero() {
        return Err(Error::ZeroTotalWeight);
    }
    let p = graph.vertex_count();
    let mut degree_per_label = vec![T::zero(); p];
    let mut edge_sum = T::zero();
    for u in 0..p {
        let lu = assignment.label(u);
        degree_per_label[lu] += graph.degree(u);
        for &(v, w) in graph.neighbors(u) {
            // Scanning every row counts each internal u != v edge twice and
            // each self-loop once, exactly the ordered-pair sum.
            if assignment.label(v) == lu {
                edge_sum += w;
            }
        }
    }
    let null_sum: T = degree_per_label.iter().map(|&d| d * d).sum();
    Ok((edge_sum - null_sum / two_m) / two_m)
}

/// Volume of each live community, indexed by label (dead labels hold zero).
pub fn volumes_per_label(volumes: &VertexVolumes, assignment: &Assignment) -> Vec<u64> {
    let mut totals = vec![0u64; assignment.len()];
    for (v, &l) in assignment.labels().iter().enumerate() {
        totals[l] += volumes.volume(v);
    }
    totals
}

/// `F(v, x)`: total volume of the community containing `v`.
pub fn community_volume(volumes: &VertexVolumes, assignment: &Assignment, v: usize) -> u64 {
    let lv = assignment.label(v);
    assignment
        .labels()
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l == lv)
        .map(|(u, _)| volumes.volume(u))
        .sum()
}

/// `T_tau(x, V)`: 1 when some community's volume is at most `tau`, else 0.
pub fn infeasibility(volumes: &VertexVolumes, assignment: &Assignment, tau: u64) -> u8 {
    let totals = volumes_per_label(volumes, assignment);
    let mut seen = vec![false; assignment.len()];
    for &l in assignment.labels() {
        if !seen[l] {
            seen[l] = true;
            if totals[l] <= tau {
                return 1;
            }
        }
    }
    0
}

/// True when every community's volume strictly exceeds `tau`.
pub fn is_feasible(volumes: &VertexVolumes, assignment: &Assignment, tau: u64) -> bool {
    infeasibility(volumes, assignment, tau) == 0
}

/// Combined penalty indicator
/// `chi(v, x) = 1{F(v,x) <= tau} + T_tau(x, V) * 1{v special and F(v,x) - f(v) > tau}`.
///
/// The first term penalizes membership in an under-volume community; the
/// second promotes moving special vertices whose volume is surplus to their
/// community whenever the assignment is infeasible somewhere.
pub fn chi(volumes: &VertexVolumes, assignment: &Assignment, v: usize, tau: u64) -> u8 {
    let totals = volumes_per_label(volumes, assignment);
    let f_v = volumes.volume(v);
    let community = totals[assignment.label(v)];
    let mut value = u8::from(community <= tau);
    if f_v > 0 && community - f_v > tau {
        let mut seen = vec![false; assignment.len()];
        let violated = assignment.labels().iter().any(|&l| {
            if seen[l] {
                return false;
            }
            seen[l] = true;
            totals[l] <= tau
        });
        value += u8::from(violated);
    }
    value
}

/// Penalized Hamiltonian `H = H_I + H_E` where `H_I` equals modularity and
/// `H_E = -lambda * sum_v lambda_v * 1{F(v,x) <= tau}`.
pub fn hamiltonian<T: Scalar>(
    graph: &WeightedGraph<T>,
    volumes: &VertexVolumes,
    assignment: &Assignment,
    ctx: &PenaltyContext<T>,
) -> Result<T> {
    let interaction = modularity(graph, assignment)?;
    let totals = volumes_per_label(volumes, assignment);
    let mut field = T::zero();
    for (v, &l) in assignment.labels().iter().enumerate() {
        if totals[l] <= ctx.tau() {
            field += ctx.lambda_v(v);
        }
    }
    Ok(interaction - ctx.lambda() * field)
}

/// Log-weight of relabeling vertex `v` to `candidate`, conditional on the
/// rest of the assignment:
///
/// `(theta / m) * [ sum_{u != v, x_u = candidate} (W_uv - d_u d_v / 2m)
///                  - lambda * |W_vv - d_v^2/2m| * chi(v, x with x_v := candidate) ]`
///
/// The penalty indicator is evaluated on the assignment with `v` already
/// moved to the candidate label.
pub fn conditional_log_weight<T: Scalar>(
    graph: &WeightedGraph<T>,
    volumes: &VertexVolumes,
    assignment: &Assignment,
    v: usize,
    candidate: usize,
    ctx: &PenaltyContext<T>,
    theta: T,
) -> Result<T> {
    check_assignment(graph, assignment)?;
    let p = graph.vertex_count();
    if v >= p {
        return Err(Error::VertexOutOfRange { index: v, count: p });
    }
    if candidate >= p {
        return Err(Error::InvalidLabel {
            label: candidate,
            count: p,
        });
    }
    let two_m = graph.total_weight();
    if two_m <= T::zero() {
        return Err(Error::ZeroTotalWeight);
    }
    let m = graph.half_total_weight();
    let d_v = graph.degree(v);

    let mut edge_part = T::zero();
    for &(u, w) in graph.neighbors(v) {
        if u != v && assignment.label(u) == candidate {
            edge_part += w;
        }
    }
    let mut degree_part = T::zero();
    for u in 0..p {
        if u != v && assignment.label(u) == candidate {
            degree_part += graph.degree(u);
        }
    }
    let interaction = edge_part - d_v * degree_part / two_m;

    let mut penalty = T::zero();
    if ctx.lambda() > T::zero() {
        let mut moved = assignment.clone();
        moved.labels_mut()[v] = candidate;
        let c = chi(volumes, &moved, v, ctx.tau());
        penalty = ctx.lambda() * ctx.lambda_v(v) * T::from_u64_lossy(u64::from(c));
    }

    Ok(theta * (interaction / m) - theta * penalty)
}

/// Normalizes log-weights into probabilities by max-subtraction.
pub fn normalize_log_weights<T: Scalar>(log_weights: &[T]) -> Vec<T> {
    let max = log_weights
        .iter()
        .copied()
        .fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}
