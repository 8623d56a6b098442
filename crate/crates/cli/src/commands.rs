use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use concord_core::analysis;
use concord_core::combinatorics;
use concord_core::generator::{self, PlantedSpec};
use concord_core::io as cio;
use concord_core::objective;
use concord_core::optimizer::EnsembleResult;
use concord_core::{
    default_tau, run_ensemble, Assignment, CoolingSchedule64, Graph64, OptimizerConfig64,
    PenaltySchedule, SamplerOptions, VertexVolumes,
};

use crate::exit::{self, CliError, CliResult, WithCode};

#[derive(Parser)]
#[command(
    name = "concord",
    about = "Modularity-maximizing community detection under per-community minimum-volume constraints",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the constrained optimization ensemble on an edge-list instance.
    Detect(DetectArgs),
    /// Compare two assignments: Jaccard stability, pair classes, volumes.
    Compare(CompareArgs),
    /// Print partition counts: Stirling row, ordered Bell, feasible counts.
    Count(CountArgs),
    /// Generate a planted-partition instance.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// Edge list file: `u v w` per line, 0-based, `#` comments ignored.
    #[arg(long)]
    edges: PathBuf,
    /// Volume file: `v f` per line; absent vertices have volume 0.
    #[arg(long)]
    volumes: PathBuf,
    /// Volume threshold: a non-negative integer, or `auto` to use the floor
    /// of the mean volume per community of a preliminary unconstrained run.
    #[arg(long, default_value = "auto")]
    tau: String,
    /// Penalty schedule: `none`, `always`, `fold:J` (switch on after fold J),
    /// or `end` (unconstrained for --rounds rounds, then constrained for as
    /// many more).
    #[arg(long, default_value = "end")]
    penalty: String,
    /// Cooling schedule: `exp2` (doubling inverse temperature) or
    /// `constant:X`.
    #[arg(long, default_value = "exp2")]
    cooling: String,
    /// Inverse temperature above which moves become argmax.
    #[arg(long, default_value_t = (2.0f64).powi(40))]
    theta_cap: f64,
    /// Sweeps per round.
    #[arg(long, default_value_t = 30)]
    sweeps: usize,
    /// Folding rounds (the `end` schedule appends as many penalized rounds).
    #[arg(long, default_value_t = 5)]
    rounds: usize,
    /// Independent chains.
    #[arg(long, default_value_t = 250)]
    chains: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Score only neighbor labels plus the current label per visit.
    #[arg(long)]
    fast: bool,
    /// Run every round even when a round changes nothing.
    #[arg(long)]
    no_early_stop: bool,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    assignment_a: PathBuf,
    #[arg(long)]
    assignment_b: PathBuf,
    #[arg(long)]
    volumes: PathBuf,
    /// Report file path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CountArgs {
    /// Total vertex count (at most 200).
    #[arg(long)]
    vertices: usize,
    /// Special vertex count (at most --vertices).
    #[arg(long)]
    specials: usize,
    /// Skip the brute-force enumeration cross-check (otherwise run whenever
    /// the vertex count is at most 10).
    #[arg(long)]
    skip_enumeration: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML file describing the planted instance.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Detect(args) => detect(args),
        Command::Compare(args) => compare(args),
        Command::Count(args) => count(args),
        Command::Generate(args) => generate(args),
    }
}

enum TauMode {
    Explicit(u64),
    Auto,
}

fn parse_tau(text: &str) -> anyhow::Result<TauMode> {
    if text == "auto" {
        return Ok(TauMode::Auto);
    }
    text.parse::<u64>()
        .map(TauMode::Explicit)
        .map_err(|_| anyhow!("--tau must be a non-negative integer or `auto`, got `{text}`"))
}

fn parse_cooling(text: &str, theta_cap: f64) -> anyhow::Result<CoolingSchedule64> {
    let schedule = if text == "exp2" {
        CoolingSchedule64::exponential(1.0)
    } else if let Some(theta) = text.strip_prefix("constant:") {
        let theta: f64 = theta
            .parse()
            .map_err(|_| anyhow!("bad constant inverse temperature `{theta}`"))?;
        CoolingSchedule64::constant(theta)
    } else {
        return Err(anyhow!(
            "--cooling must be `exp2` or `constant:X`, got `{text}`"
        ));
    };
    if theta_cap <= 0.0 {
        return Err(anyhow!("--theta-cap must be positive"));
    }
    Ok(schedule?.with_cap(theta_cap))
}

/// Resolves the penalty preset to a schedule and an effective round count.
fn parse_penalty(text: &str, rounds: usize) -> anyhow::Result<(PenaltySchedule, usize)> {
    match text {
        "none" => Ok((PenaltySchedule::ConstantZero, rounds)),
        "always" => Ok((PenaltySchedule::ConstantOne, rounds)),
        "end" => Ok((PenaltySchedule::SwitchAtFold(rounds), rounds * 2)),
        other => {
            let j = other
                .strip_prefix("fold:")
                .ok_or_else(|| {
                    anyhow!("--penalty must be `none`, `always`, `fold:J` or `end`, got `{other}`")
                })?
                .parse::<usize>()
                .map_err(|_| anyhow!("bad fold index in `{other}`"))?;
            if j == 0 || j >= rounds {
                return Err(anyhow!(
                    "`fold:{j}` must satisfy 1 <= J < rounds ({rounds}) so the penalty takes effect"
                ));
            }
            Ok((PenaltySchedule::SwitchAtFold(j), rounds))
        }
    }
}

fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn kv_float(key: &str, value: f64) -> (String, String) {
    (key.to_string(), cio::format_float(value))
}

fn detect(args: DetectArgs) -> CliResult<()> {
    let started = Instant::now();

    if args.sweeps == 0 || args.rounds == 0 || args.chains == 0 {
        return Err(CliError::new(
            exit::INVALID_CONFIG,
            anyhow!("--sweeps, --rounds and --chains must all be at least 1"),
        ));
    }
    let tau_mode = parse_tau(&args.tau).code(exit::INVALID_CONFIG)?;
    let cooling = parse_cooling(&args.cooling, args.theta_cap).code(exit::INVALID_CONFIG)?;
    let (schedule, effective_rounds) =
        parse_penalty(&args.penalty, args.rounds).code(exit::INVALID_CONFIG)?;

    let (graph, volumes): (Graph64, VertexVolumes) =
        cio::load_instance(&args.edges, &args.volumes).code(exit::PARSE_FAILURE)?;

    let sampler = SamplerOptions {
        neighbor_candidates_only: args.fast,
        ..Default::default()
    };
    let make_config = |penalty: PenaltySchedule, rounds: usize| {
        let mut config = OptimizerConfig64::new(penalty, cooling.clone(), args.sweeps, rounds);
        config.early_stop = !args.no_early_stop;
        config.sampler = sampler;
        config
    };

    // Auto threshold: run the unconstrained phase first, set the threshold to
    // the floor of its mean volume per community, then rerun with the penalty
    // schedule. Identical chain streams make the penalized runs share the
    // unconstrained prefix sample path.
    let (tau, tau_source): (u64, Option<usize>) = match tau_mode {
        TauMode::Explicit(t) => (t, None),
        TauMode::Auto => {
            let config = make_config(PenaltySchedule::ConstantZero, args.rounds);
            let unconstrained = run_ensemble(&graph, &volumes, 0, &[config], args.chains, args.seed)
                .code(exit::INVALID_CONFIG)?;
            let communities = unconstrained.best_overall.assignment.community_count();
            (
                default_tau(&volumes, &unconstrained.best_overall.assignment),
                Some(communities),
            )
        }
    };

    let config = make_config(schedule, effective_rounds);
    let result = run_ensemble(&graph, &volumes, tau, &[config], args.chains, args.seed)
        .code(exit::INVALID_CONFIG)?;

    std::fs::create_dir_all(&args.out).code(exit::PARSE_FAILURE)?;
    write_detect_artifacts(&args, &graph, &volumes, tau, tau_source, &result)
        .code(exit::PARSE_FAILURE)?;
    eprintln!(
        "detect: wall time {:.3}s, artifacts in {}",
        started.elapsed().as_secs_f64(),
        args.out.display()
    );

    if args.penalty != "none" && result.best_feasible.is_none() {
        let reason = if result.feasible_space_empty {
            format!(
                "threshold {tau} is at least the total volume {}; no assignment is feasible",
                volumes.total()
            )
        } else {
            format!("no feasible assignment was traversed at threshold {tau}")
        };
        return Err(CliError::new(exit::NO_FEASIBLE_ASSIGNMENT, anyhow!(reason)));
    }
    Ok(())
}

fn write_detect_artifacts(
    args: &DetectArgs,
    graph: &Graph64,
    volumes: &VertexVolumes,
    tau: u64,
    tau_source: Option<usize>,
    result: &EnsembleResult<f64>,
) -> anyhow::Result<()> {
    let out = &args.out;
    cio::write_assignment(
        &out.join("assignment_overall.csv"),
        &result.best_overall.assignment,
    )?;
    if let Some(feasible) = &result.best_feasible {
        cio::write_assignment(&out.join("assignment_feasible.csv"), &feasible.assignment)?;
    }
    cio::write_trace_csv(&out.join("trace.csv"), &result.traces)?;

    let mut entries = vec![
        kv("command", "detect"),
        kv("edges_file", args.edges.display()),
        kv("volumes_file", args.volumes.display()),
        kv("vertices", graph.vertex_count()),
        kv("edges", graph.edge_count()),
        kv_float("total_weight", graph.total_weight()),
        kv("total_volume", volumes.total()),
        kv("special_vertices", volumes.special_set().len()),
        kv(
            "tau_mode",
            if tau_source.is_some() { "auto" } else { "explicit" },
        ),
        kv("tau", tau),
    ];
    if let Some(communities) = tau_source {
        entries.push(kv("tau_source_communities", communities));
    }
    let rounds_effective = if args.penalty == "end" {
        args.rounds * 2
    } else {
        args.rounds
    };
    entries.extend([
        kv("penalty", &args.penalty),
        kv("cooling", &args.cooling),
        kv_float("theta_cap", args.theta_cap),
        kv("sweeps_per_round", args.sweeps),
        kv("rounds", args.rounds),
        kv("rounds_effective", rounds_effective),
        kv("chains", args.chains),
        kv("seed", args.seed),
        kv("fast_mode", args.fast),
        kv("early_stop", !args.no_early_stop),
        kv_float("q_best_overall", result.best_overall.modularity),
        kv(
            "communities_best_overall",
            result.best_overall.assignment.community_count(),
        ),
        kv("best_overall_chain", result.best_overall.chain_index),
        kv("best_overall_round", result.best_overall.round),
        kv("best_overall_sweep", result.best_overall.sweep),
        kv("feasible_found", result.best_feasible.is_some()),
    ]);
    if let Some(feasible) = &result.best_feasible {
        entries.extend([
            kv_float("q_best_feasible", feasible.modularity),
            kv(
                "communities_best_feasible",
                feasible.assignment.community_count(),
            ),
            kv("best_feasible_chain", feasible.chain_index),
            kv("best_feasible_round", feasible.round),
            kv("best_feasible_sweep", feasible.sweep),
        ]);
    }
    entries.push(kv("feasible_space_empty", result.feasible_space_empty));
    cio::write_key_values(&out.join("summary.txt"), &entries)?;
    Ok(())
}

fn compare(args: CompareArgs) -> CliResult<()> {
    let a = cio::read_assignment(&args.assignment_a).code(exit::PARSE_FAILURE)?;
    let b = cio::read_assignment(&args.assignment_b).code(exit::PARSE_FAILURE)?;
    let pairs = cio::read_volume_pairs(&args.volumes).code(exit::PARSE_FAILURE)?;
    if a.len() != b.len() {
        return Err(CliError::new(
            exit::INVALID_CONFIG,
            anyhow!(
                "assignments cover different vertex sets ({} vs {} vertices)",
                a.len(),
                b.len()
            ),
        ));
    }
    let mut volumes = vec![0u64; a.len()];
    for (v, f) in pairs {
        if v >= a.len() {
            return Err(CliError::new(
                exit::INVALID_CONFIG,
                anyhow!("volume file mentions vertex {v}, beyond the assignments"),
            ));
        }
        volumes[v] += f;
    }
    let volumes = VertexVolumes::new(volumes);
    let report: analysis::ComparisonReport<f64> =
        analysis::compare(&a, &b, &volumes).code(exit::INVALID_CONFIG)?;

    let mut out = String::new();
    out.push_str(&format!("command: compare\nvertices: {}\n", a.len()));
    out.push_str(&format!("communities_a: {}\n", a.community_count()));
    out.push_str(&format!("communities_b: {}\n", b.community_count()));
    out.push_str(&format!("pairs_both: {}\n", report.pair_classes.both));
    out.push_str(&format!("pairs_only_a: {}\n", report.pair_classes.only_a));
    out.push_str(&format!("pairs_only_b: {}\n", report.pair_classes.only_b));
    out.push_str(&format!(
        "mean_community_size_a: {}\n",
        cio::format_float(report.mean_community_size_a)
    ));
    out.push_str(&format!(
        "mean_community_size_b: {}\n",
        cio::format_float(report.mean_community_size_b)
    ));
    out.push_str("[jaccard]\n");
    for (v, j) in report.jaccard.iter().enumerate() {
        out.push_str(&format!("{v} {}\n", cio::format_float(*j)));
    }
    out.push_str("[volume_totals_a]\n");
    for t in &report.volume_totals_a {
        out.push_str(&format!("{t}\n"));
    }
    out.push_str("[volume_totals_b]\n");
    for t in &report.volume_totals_b {
        out.push_str(&format!("{t}\n"));
    }
    out.push_str("[overlap]\n");
    for e in &report.overlap_edges {
        out.push_str(&format!("{} {} {}\n", e.community_a, e.community_b, e.shared));
    }
    cio::write_atomic(&args.out, &out).code(exit::PARSE_FAILURE)?;
    Ok(())
}

fn count(args: CountArgs) -> CliResult<()> {
    let p = args.vertices;
    let r = args.specials;
    if p == 0 || p > 200 {
        return Err(CliError::new(
            exit::INVALID_CONFIG,
            anyhow!("--vertices must be between 1 and 200"),
        ));
    }
    if r > p {
        return Err(CliError::new(
            exit::INVALID_CONFIG,
            anyhow!("--specials must not exceed --vertices"),
        ));
    }
    println!("p: {p}");
    println!("r: {r}");
    let row: Vec<String> = (0..=p)
        .map(|k| combinatorics::stirling2(p, k).to_string())
        .collect();
    println!("stirling_row: {}", row.join(" "));
    println!("ordered_bell: {}", combinatorics::ordered_bell(r));
    println!(
        "ordered_bell_approx: {}",
        cio::format_float(combinatorics::ordered_bell_approx(r))
    );
    let paper = combinatorics::count_feasible_paper(p, r).code(exit::INVALID_CONFIG)?;
    let exact = combinatorics::count_feasible_exact(p, r).code(exit::INVALID_CONFIG)?;
    println!("count_paper: {paper}");
    println!("count_exact: {exact}");
    if !args.skip_enumeration && p <= 10 {
        let enumerated = combinatorics::count_feasible_enumerated(p, r).code(exit::INVALID_CONFIG)?;
        println!("count_enumerated: {enumerated}");
        println!("enumeration_matches_exact: {}", enumerated == exact);
    } else {
        println!("count_enumerated: skipped");
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))
        .code(exit::PARSE_FAILURE)?;
    let spec: PlantedSpec = toml::from_str(&text)
        .with_context(|| format!("parsing {}", args.spec.display()))
        .code(exit::PARSE_FAILURE)?;
    let (graph, volumes, truth): (Graph64, VertexVolumes, Assignment) =
        generator::generate(&spec).code(exit::INVALID_CONFIG)?;

    std::fs::create_dir_all(&args.out).code(exit::PARSE_FAILURE)?;
    cio::write_edge_list(&args.out.join("edges.txt"), &graph).code(exit::PARSE_FAILURE)?;
    cio::write_volumes(&args.out.join("volumes.txt"), &volumes).code(exit::PARSE_FAILURE)?;
    cio::write_assignment(&args.out.join("truth.csv"), &truth).code(exit::PARSE_FAILURE)?;

    let q = objective::modularity(&graph, &truth)
        .map(|q| cio::format_float(q))
        .unwrap_or_else(|_| "undefined".to_string());
    println!("vertices: {}", graph.vertex_count());
    println!("edges: {}", graph.edge_count());
    println!("total_volume: {}", volumes.total());
    println!("planted_modularity: {q}");
    Ok(())
}
