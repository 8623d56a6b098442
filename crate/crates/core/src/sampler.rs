//! Iterative multinomial resampling of vertex labels from their conditional
//! distributions, under a per-sweep cooling schedule. Labels can only go
//! extinct, so the community count is non-increasing along a chain.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::{VertexVolumes, WeightedGraph};
use crate::objective::{self, PenaltyContext};
use crate::scalar::Scalar;

/// Inverse-temperature schedule, evaluated once per sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum CoolingKind<T> {
    /// theta(t) = theta0 for every sweep.
    Constant,
    /// theta(t) = theta0 * 2^(t-1), so theta0 = 1 gives 2^(t-1).
    ExponentialBase2,
    /// theta(t) = table[t-1], clamped to the last entry.
    Table(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingSchedule<T> {
    kind: CoolingKind<T>,
    theta0: T,
    /// Above this value sampling switches to argmax with uniform
    /// tie-breaking, the analytic limit of the multinomial.
    theta_cap: T,
}

impl<T: Scalar> CoolingSchedule<T> {
    /// Default argmax switch point.
    pub fn default_cap() -> T {
        T::from_f64_lossy((2.0f64).powi(40))
    }

    pub fn constant(theta0: T) -> Result<Self> {
        Self::new(CoolingKind::Constant, theta0, Self::default_cap())
    }

    pub fn exponential(theta0: T) -> Result<Self> {
        Self::new(CoolingKind::ExponentialBase2, theta0, Self::default_cap())
    }

    pub fn table(table: Vec<T>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidParameter("empty cooling table".into()));
        }
        if table.iter().any(|&t| !(t > T::zero())) {
            return Err(Error::InvalidParameter(
                "cooling table entries must be positive".into(),
            ));
        }
        Self::new(CoolingKind::Table(table), T::one(), Self::default_cap())
    }

    pub fn new(kind: CoolingKind<T>, theta0: T, theta_cap: T) -> Result<Self> {
        if !(theta0 > T::zero()) {
            return Err(Error::InvalidParameter(
                "initial inverse temperature must be positive".into(),
            ));
        }
        if !(theta_cap > T::zero()) {
            return Err(Error::InvalidParameter(
                "argmax switch point must be positive".into(),
            ));
        }
        Ok(Self {
            kind,
            theta0,
            theta_cap,
        })
    }

    pub fn with_cap(mut self, theta_cap: T) -> Self {
        self.theta_cap = theta_cap;
        self
    }

    /// Inverse temperature for 1-based sweep index `t`.
    pub fn theta(&self, t: usize) -> T {
        match &self.kind {
            CoolingKind::Constant => self.theta0,
            CoolingKind::ExponentialBase2 => {
                self.theta0 * T::from_f64_lossy(2.0).powi(t as i32 - 1)
            }
            CoolingKind::Table(table) => table[(t - 1).min(table.len() - 1)],
        }
    }

    pub fn theta_cap(&self) -> T {
        self.theta_cap
    }
}

/// Tuning knobs for the resampling loop. Defaults follow the reference
/// procedure: all live labels are scored for every vertex and sweeps run
/// unconditionally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SamplerOptions {
    /// Restrict candidates to the labels of the vertex's neighbors plus its
    /// current label. Faster, but non-adjacent merges can only happen through
    /// null-model scoring of adjacent labels, so it may explore less.
    pub neighbor_candidates_only: bool,
    /// Stop a run early after a sweep with zero label changes while in the
    /// argmax regime.
    pub halt_on_stable_argmax: bool,
}

/// Mutable chain state: the assignment plus incremental per-label caches and
/// the RNG stream.
#[derive(Debug, Clone)]
pub struct SweepState<T> {
    assignment: Assignment,
    /// Ascending list of labels with at least one member.
    live: Vec<usize>,
    member_count: Vec<usize>,
    label_volume: Vec<u64>,
    label_degree: Vec<T>,
    community_count: usize,
    rng: ChaCha8Rng,
    // Scratch for per-visit edge sums, reset between visits.
    edge_scratch: Vec<T>,
    touched: Vec<usize>,
}

impl<T: Scalar> SweepState<T> {
    pub fn new(
        graph: &WeightedGraph<T>,
        volumes: &VertexVolumes,
        initial: Assignment,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let p = graph.vertex_count();
        if initial.len() != p {
            return Err(Error::AssignmentLength {
                expected: p,
                actual: initial.len(),
            });
        }
        if volumes.len() != p {
            return Err(Error::AssignmentLength {
                expected: p,
                actual: volumes.len(),
            });
        }
        let mut member_count = vec![0usize; p];
        let mut label_volume = vec![0u64; p];
        let mut label_degree = vec![T::zero(); p];
        for (v, &l) in initial.labels().iter().enumerate() {
            member_count[l] += 1;
            label_volume[l] += volumes.volume(v);
            label_degree[l] += graph.degree(v);
        }
        let live: Vec<usize> = (0..p).filter(|&l| member_count[l] > 0).collect();
        let community_count = live.len();
        Ok(Self {
            assignment: initial,
            live,
            member_count,
            label_volume,
            label_degree,
            community_count,
            rng,
            edge_scratch: vec![T::zero(); p],
            touched: Vec::new(),
        })
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn live_labels(&self) -> &[usize] {
        &self.live
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn community_volume_of_label(&self, label: usize) -> u64 {
        self.label_volume[label]
    }

    fn remove_live(&mut self, label: usize) {
        if let Ok(pos) = self.live.binary_search(&label) {
            self.live.remove(pos);
        }
        self.community_count -= 1;
    }
}

/// Per-sweep record captured by [`local_optimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord<T> {
    /// 1-based sweep index.
    pub sweep: usize,
    pub theta: T,
    pub modularity: T,
    pub hamiltonian: T,
    /// `T_tau` of the sweep-end assignment.
    pub infeasible: bool,
    pub community_count: usize,
}

/// Result of a local optimization run on one (possibly folded) graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTrace<T> {
    pub records: Vec<SweepRecord<T>>,
    /// Assignment at the end of each sweep, aligned with `records`.
    pub snapshots: Vec<Assignment>,
    /// Total number of vertex label changes across the run.
    pub label_changes: usize,
}

impl<T: Clone> LocalTrace<T> {
    pub fn final_assignment(&self) -> &Assignment {
        self.snapshots.last().expect("at least one sweep")
    }
}

/// Smallest three (volume, label) pairs among live labels; used to evaluate
/// the post-move minimum community volume with up to two labels excluded.
fn smallest_volumes(state: &SweepState<impl Scalar>) -> [(u64, usize); 3] {
    let mut mins = [(u64::MAX, usize::MAX); 3];
    for &l in &state.live {
        let entry = (state.label_volume[l], l);
        if entry < mins[0] {
            mins[2] = mins[1];
            mins[1] = mins[0];
            mins[0] = entry;
        } else if entry < mins[1] {
            mins[2] = mins[1];
            mins[1] = entry;
        } else if entry < mins[2] {
            mins[2] = entry;
        }
    }
    mins
}

fn min_volume_excluding(mins: &[(u64, usize); 3], a: usize, b: usize) -> u64 {
    for &(vol, label) in mins {
        if label != a && label != b {
            return vol;
        }
    }
    u64::MAX
}

/// Candidate labels for `v`: all live labels, or in fast mode the labels of
/// `v`'s neighbors plus its current label, ascending either way.
fn candidate_labels<T: Scalar>(
    state: &SweepState<T>,
    graph: &WeightedGraph<T>,
    v: usize,
    opts: &SamplerOptions,
) -> Vec<usize> {
    if !opts.neighbor_candidates_only {
        return state.live.clone();
    }
    let mut cands: Vec<usize> = graph
        .neighbors(v)
        .iter()
        .filter(|&&(u, _)| u != v)
        .map(|&(u, _)| state.assignment.label(u))
        .collect();
    cands.push(state.assignment.label(v));
    cands.sort_unstable();
    cands.dedup();
    cands
}

/// Log-weights of every candidate label for vertex `v`, computed from the
/// incremental caches. Returned pairs are `(label, log_weight)` in ascending
/// label order.
pub(crate) fn candidate_log_weights<T: Scalar>(
    state: &mut SweepState<T>,
    graph: &WeightedGraph<T>,
    volumes: &VertexVolumes,
    ctx: &PenaltyContext<T>,
    theta: T,
    v: usize,
    candidates: &[usize],
) -> Vec<T> {
    let two_m = graph.total_weight();
    let m = graph.half_total_weight();
    let d_v = graph.degree(v);
    let f_v = volumes.volume(v);
    let old = state.assignment.label(v);
    let sole_member = state.member_count[old] == 1;

    // Edge weight from v into each candidate community.
    for &(u, w) in graph.neighbors(v) {
        if u == v {
            continue;
        }
        let l = state.assignment.label(u);
        if state.edge_scratch[l] == T::zero() {
            state.touched.push(l);
        }
        state.edge_scratch[l] += w;
    }

    let apply_penalty = ctx.lambda() > T::zero() && ctx.lambda_v(v) > T::zero();
    let mins = if apply_penalty {
        smallest_volumes(state)
    } else {
        [(u64::MAX, usize::MAX); 3]
    };
    let tau = ctx.tau();

    let mut weights = Vec::with_capacity(candidates.len());
    for &c in candidates {
        let mut degree_sum = state.label_degree[c];
        if c == old {
            degree_sum -= d_v;
        }
        let interaction = state.edge_scratch[c] - d_v * degree_sum / two_m;
        let mut log_w = theta * (interaction / m);

        if apply_penalty {
            // Volume of v's community after moving v to c, and the global
            // infeasibility of the moved assignment.
            let (f_new, infeasible_new) = if c == old {
                (state.label_volume[old], mins[0].0 <= tau)
            } else {
                let mut min_vol = min_volume_excluding(&mins, old, c);
                let joined = state.label_volume[c] + f_v;
                min_vol = min_vol.min(joined);
                if !sole_member {
                    min_vol = min_vol.min(state.label_volume[old] - f_v);
                }
                (joined, min_vol <= tau)
            };
            let mut chi = u8::from(f_new <= tau);
            if f_v > 0 && f_new - f_v > tau && infeasible_new {
                chi += 1;
            }
            if chi > 0 {
                log_w -= theta
                    * ctx.lambda()
                    * ctx.lambda_v(v)
                    * T::from_u64_lossy(u64::from(chi));
            }
        }
        weights.push(log_w);
    }

    for &l in &state.touched {
        state.edge_scratch[l] = T::zero();
    }
    state.touched.clear();

    weights
}

/// Resamples the label of vertex `v` in place. Returns `true` when the label
/// changed. Above the cooling schedule's cap the draw degenerates to argmax
/// with uniform tie-breaking.
pub fn resample_vertex<T: Scalar>(
    state: &mut SweepState<T>,
    graph: &WeightedGraph<T>,
    volumes: &VertexVolumes,
    ctx: &PenaltyContext<T>,
    theta: T,
    theta_cap: T,
    v: usize,
    opts: &SamplerOptions,
) -> bool {
    let candidates = candidate_labels(state, graph, v, opts);
    let weights = candidate_log_weights(state, graph, volumes, ctx, theta, v, &candidates);

    let pick = if theta >= theta_cap {
        let max = weights.iter().copied().fold(T::neg_infinity(), T::max);
        let tied: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] == max).collect();
        if tied.len() == 1 {
            tied[0]
        } else {
            tied[state.rng.random_range(0..tied.len())]
        }
    } else {
        let max = weights.iter().copied().fold(T::neg_infinity(), T::max);
        let exps: Vec<T> = weights.iter().map(|&w| (w - max).exp()).collect();
        let total: T = exps.iter().copied().sum();
        let u = T::from_f64_lossy(state.rng.random::<f64>()) * total;
        let mut cumulative = T::zero();
        let mut chosen = exps.len() - 1;
        for (i, &e) in exps.iter().enumerate() {
            cumulative += e;
            if u < cumulative {
                chosen = i;
                break;
            }
        }
        chosen
    };

    let new_label = candidates[pick];
    let old = state.assignment.label(v);
    if new_label == old {
        return false;
    }

    state.member_count[old] -= 1;
    state.member_count[new_label] += 1;
    let f_v = volumes.volume(v);
    state.label_volume[old] -= f_v;
    state.label_volume[new_label] += f_v;
    let d_v = graph.degree(v);
    state.label_degree[old] -= d_v;
    state.label_degree[new_label] += d_v;
    state.assignment.labels_mut()[v] = new_label;
    if state.member_count[old] == 0 {
        state.remove_live(old);
    }
    true
}

/// Draws a uniformly random permutation of `0..n` (Fisher-Yates).
fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Runs `sweeps` full resampling cycles over all vertices. Each sweep updates
/// the inverse temperature from the schedule, visits all vertices in a fresh
/// random permutation, and records the sweep-end assignment with its
/// modularity, Hamiltonian, feasibility, and community count.
pub fn local_optimize<T: Scalar>(
    graph: &WeightedGraph<T>,
    volumes: &VertexVolumes,
    ctx: &PenaltyContext<T>,
    cooling: &CoolingSchedule<T>,
    sweeps: usize,
    initial: Assignment,
    rng: ChaCha8Rng,
    opts: &SamplerOptions,
) -> Result<LocalTrace<T>> {
    if sweeps == 0 {
        return Err(Error::InvalidParameter(
            "sweep count must be at least 1".into(),
        ));
    }
    let p = graph.vertex_count();
    let mut state = SweepState::new(graph, volumes, initial, rng)?;
    let mut records = Vec::with_capacity(sweeps);
    let mut snapshots = Vec::with_capacity(sweeps);
    let mut label_changes = 0usize;

    for t in 1..=sweeps {
        let theta = cooling.theta(t);
        let perm = random_permutation(&mut state.rng, p);
        let mut changes_this_sweep = 0usize;
        for &v in &perm {
            if resample_vertex(
                &mut state,
                graph,
                volumes,
                ctx,
                theta,
                cooling.theta_cap(),
                v,
                opts,
            ) {
                changes_this_sweep += 1;
            }
        }
        label_changes += changes_this_sweep;

        let q = objective::modularity(graph, state.assignment())?;
        let h = objective::hamiltonian(graph, volumes, state.assignment(), ctx)?;
        let infeasible = objective::infeasibility(volumes, state.assignment(), ctx.tau()) == 1;
        records.push(SweepRecord {
            sweep: t,
            theta,
            modularity: q,
            hamiltonian: h,
            infeasible,
            community_count: state.community_count(),
        });
        snapshots.push(state.assignment().clone());

        if opts.halt_on_stable_argmax && changes_this_sweep == 0 && theta >= cooling.theta_cap() {
            break;
        }
    }

    Ok(LocalTrace {
        records,
        snapshots,
        label_changes,
    })
}

/// RNG for chain `stream` of a run seeded with `seed`. Streams are
/// independent, so chains can execute in any order with identical results.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
