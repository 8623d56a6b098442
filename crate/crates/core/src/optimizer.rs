//! The full optimization procedure: alternate local optimization and graph
//! folding for a number of rounds under a penalty schedule, run ensembles of
//! independent chains, and select the best traversed assignment overall and
//! the best feasible one.

use rayon::prelude::*;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::{fold, FoldMap, VertexVolumes, WeightedGraph};
use crate::objective::PenaltyContext;
use crate::sampler::{chain_rng, local_optimize, CoolingSchedule, SamplerOptions};
use crate::scalar::Scalar;

/// Binary penalty schedule over rounds: the multiplier is 0 or 1 and never
/// decreases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltySchedule {
    /// Never penalize (unconstrained optimization).
    ConstantZero,
    /// Penalize from the first round.
    ConstantOne,
    /// Unconstrained through fold `j`, penalized from round `j + 1` on.
    SwitchAtFold(usize),
}

impl PenaltySchedule {
    /// Multiplier for 1-based round `r`.
    pub fn lambda(&self, round: usize) -> u8 {
        match *self {
            PenaltySchedule::ConstantZero => 0,
            PenaltySchedule::ConstantOne => 1,
            PenaltySchedule::SwitchAtFold(j) => u8::from(round > j),
        }
    }

    /// True when the multiplier is 1 for the final round of an `rounds`-round
    /// run.
    pub fn ends_penalized(&self, rounds: usize) -> bool {
        self.lambda(rounds) == 1
    }
}

/// Configuration of a single chain: schedule, cooling, and loop sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    pub penalty: PenaltySchedule,
    pub cooling: CoolingSchedule<T>,
    pub sweeps_per_round: usize,
    pub rounds: usize,
    /// Stop early when a round changes no labels and folding no longer
    /// shrinks the graph, provided the penalty multiplier is already at its
    /// final value.
    pub early_stop: bool,
    pub sampler: SamplerOptions,
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn new(
        penalty: PenaltySchedule,
        cooling: CoolingSchedule<T>,
        sweeps_per_round: usize,
        rounds: usize,
    ) -> Self {
        Self {
            penalty,
            cooling,
            sweeps_per_round,
            rounds,
            early_stop: true,
            sampler: SamplerOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sweeps_per_round == 0 {
            return Err(Error::InvalidParameter(
                "sweeps per round must be at least 1".into(),
            ));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidParameter(
                "round count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One sweep-end observation within a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord<T> {
    /// 1-based round index.
    pub round: usize,
    /// 1-based sweep index within the round.
    pub sweep: usize,
    pub theta: T,
    pub lambda: T,
    pub modularity: T,
    pub hamiltonian: T,
    /// `T_tau` of the assignment at this sweep end.
    pub infeasible: bool,
    pub community_count: usize,
}

/// Location and value of a selected assignment within a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct BestState<T> {
    pub assignment: Assignment,
    pub modularity: T,
    pub round: usize,
    pub sweep: usize,
}

/// Full sample path of one chain. Snapshots are expressed on the original
/// vertex set, carried back through the composed fold maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace<T> {
    pub records: Vec<ChainRecord<T>>,
    pub snapshots: Vec<Assignment>,
    pub best_feasible: Option<BestState<T>>,
    pub best_overall: BestState<T>,
    /// Composition of all fold maps applied across rounds.
    pub fold_map: FoldMap,
}

/// Runs `rounds` alternations of local optimization and folding on `graph`,
/// with the penalty multiplier supplied per round by the schedule. Every
/// sweep-end assignment is recorded, unfolded to the original vertex set.
pub fn constrained_optimize<T: Scalar>(
    graph: &WeightedGraph<T>,
    volumes: &VertexVolumes,
    tau: u64,
    config: &OptimizerConfig<T>,
    seed: u64,
) -> Result<ChainTrace<T>> {
    constrained_optimize_stream(graph, volumes, tau, config, seed, 0)
}

/// As [`constrained_optimize`], with an explicit RNG stream so ensembles can
/// give each chain an independent substream of the same seed.
pub fn constrained_optimize_stream<T: Scalar>(
    graph: &WeightedGraph<T>,
    volumes: &VertexVolumes,
    tau: u64,
    config: &OptimizerConfig<T>,
    seed: u64,
    stream: u64,
) -> Result<ChainTrace<T>> {
    config.validate()?;
    let p = graph.vertex_count();
    // Master stream for this chain; each round runs on a sub-generator
    // seeded from it, so a penalty switch in a later round leaves the
    // earlier rounds' sample paths bit-identical.
    let mut rng = chain_rng(seed, stream);

    let mut current_graph = graph.clone();
    let mut current_volumes = volumes.clone();
    let mut fold_map = FoldMap::identity(p);

    let mut records = Vec::new();
    let mut snapshots: Vec<Assignment> = Vec::new();

    for round in 1..=config.rounds {
        let lambda = T::from_u64_lossy(u64::from(config.penalty.lambda(round)));
        let ctx = PenaltyContext::new(&current_graph, tau, lambda)?;
        let initial = Assignment::singletons(current_graph.vertex_count());
        let round_rng = {
            use rand::{Rng, SeedableRng};
            rand_chacha::ChaCha8Rng::seed_from_u64(rng.random::<u64>())
        };
        let trace = local_optimize(
            &current_graph,
            &current_volumes,
            &ctx,
            &config.cooling,
            config.sweeps_per_round,
            initial,
            round_rng,
            &config.sampler,
        )?;

        for (record, snapshot) in trace.records.iter().zip(trace.snapshots.iter()) {
            records.push(ChainRecord {
                round,
                sweep: record.sweep,
                theta: record.theta,
                lambda,
                modularity: record.modularity,
                hamiltonian: record.hamiltonian,
                infeasible: record.infeasible,
                community_count: record.community_count,
            });
            snapshots.push(fold_map.unfold(snapshot));
        }

        let before = current_graph.vertex_count();
        let (folded_graph, folded_volumes, map) =
            fold(&current_graph, &current_volumes, trace.final_assignment())?;
        fold_map = fold_map.compose(&map);
        let shrunk = folded_graph.vertex_count() < before;
        current_graph = folded_graph;
        current_volumes = folded_volumes;

        if config.early_stop
            && trace.label_changes == 0
            && !shrunk
            && schedule_is_settled(&config.penalty, round, config.rounds)
        {
            break;
        }
    }

    let mut best_overall: Option<BestState<T>> = None;
    let mut best_feasible: Option<BestState<T>> = None;
    for (record, snapshot) in records.iter().zip(snapshots.iter()) {
        let better = |current: &Option<BestState<T>>| {
            current
                .as_ref()
                .is_none_or(|b| record.modularity > b.modularity)
        };
        if better(&best_overall) {
            best_overall = Some(BestState {
                assignment: snapshot.clone(),
                modularity: record.modularity,
                round: record.round,
                sweep: record.sweep,
            });
        }
        if !record.infeasible && better(&best_feasible) {
            best_feasible = Some(BestState {
                assignment: snapshot.clone(),
                modularity: record.modularity,
                round: record.round,
                sweep: record.sweep,
            });
        }
    }

    Ok(ChainTrace {
        records,
        snapshots,
        best_feasible,
        best_overall: best_overall.expect("at least one sweep recorded"),
        fold_map,
    })
}

/// True when the penalty multiplier no longer changes after `round`.
fn schedule_is_settled(schedule: &PenaltySchedule, round: usize, rounds: usize) -> bool {
    let now = schedule.lambda(round);
    (round..=rounds).all(|r| schedule.lambda(r) == now)
}

/// Selected state within an ensemble, addressed by configuration, chain,
/// round, and sweep. Ties favor the earliest location in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedState<T> {
    pub assignment: Assignment,
    pub modularity: T,
    pub config_index: usize,
    pub chain_index: usize,
    pub round: usize,
    pub sweep: usize,
}

/// Result of an ensemble run: the best traversed assignment overall, the
/// best feasible one when any feasible state was traversed, and all traces.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult<T> {
    pub best_overall: SelectedState<T>,
    pub best_feasible: Option<SelectedState<T>>,
    /// True when no feasible assignment exists at all for this threshold
    /// (the total volume does not exceed it), so `best_feasible` is
    /// structurally absent rather than merely not found.
    pub feasible_space_empty: bool,
    pub traces: Vec<ChainTrace<T>>,
}

/// Runs `chains_per_config` chains for every configuration, concurrently,
/// and reduces deterministically. Chain `c` of configuration `k` draws from
/// RNG stream `k * 2^32 + c` of `seed`.
pub fn run_ensemble<T: Scalar>(
    graph: &WeightedGraph<T>,
    volumes: &VertexVolumes,
    tau: u64,
    configs: &[OptimizerConfig<T>],
    chains_per_config: usize,
    seed: u64,
) -> Result<EnsembleResult<T>> {
    if configs.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one configuration is required".into(),
        ));
    }
    if chains_per_config == 0 {
        return Err(Error::InvalidParameter(
            "chain count must be at least 1".into(),
        ));
    }

    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|k| (0..chains_per_config).map(move |c| (k, c)))
        .collect();
    let traces: Vec<ChainTrace<T>> = jobs
        .par_iter()
        .map(|&(k, c)| {
            let stream = ((k as u64) << 32) | c as u64;
            constrained_optimize_stream(graph, volumes, tau, &configs[k], seed, stream)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best_overall: Option<SelectedState<T>> = None;
    let mut best_feasible: Option<SelectedState<T>> = None;
    for (job_index, trace) in traces.iter().enumerate() {
        let (config_index, chain_index) = jobs[job_index];
        for (record, snapshot) in trace.records.iter().zip(trace.snapshots.iter()) {
            let better = |current: &Option<SelectedState<T>>| {
                current
                    .as_ref()
                    .is_none_or(|b| record.modularity > b.modularity)
            };
            if better(&best_overall) {
                best_overall = Some(SelectedState {
                    assignment: snapshot.clone(),
                    modularity: record.modularity,
                    config_index,
                    chain_index,
                    round: record.round,
                    sweep: record.sweep,
                });
            }
            if !record.infeasible && better(&best_feasible) {
                best_feasible = Some(SelectedState {
                    assignment: snapshot.clone(),
                    modularity: record.modularity,
                    config_index,
                    chain_index,
                    round: record.round,
                    sweep: record.sweep,
                });
            }
        }
    }

    Ok(EnsembleResult {
        best_overall: best_overall.expect("ensemble is non-empty"),
        best_feasible,
        feasible_space_empty: volumes.total() <= tau,
        traces,
    })
}

/// Default threshold from an unconstrained solution: the floor of the mean
/// volume per community, `floor(sum f(v) / |x|)`.
pub fn default_tau(volumes: &VertexVolumes, assignment: &Assignment) -> u64 {
    let communities = assignment.community_count() as u64;
    volumes.total() / communities
}
