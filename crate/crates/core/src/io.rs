//! File formats: whitespace-separated edge lists and volume files, assignment
//! and trace CSVs, and key-value summaries. All writers go through a
//! write-to-temporary-then-rename helper so no artifact is left partially
//! written, and floats are serialized with 17 significant digits so values
//! round-trip bit-faithfully.

use std::fs;
use std::path::Path;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::{VertexVolumes, WeightedGraph};
use crate::optimizer::ChainTrace;
use crate::scalar::Scalar;

/// 17 significant digits: enough to reconstruct any `f64` exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_scalar<T: Scalar>(x: T) -> String {
    format_float(x.to_f64().expect("scalar convertible to f64"))
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, contents)?;
    fs::rename(tmp, path)?;
    Ok(())
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Reads a `u v w` edge list: one whitespace-separated triple per line,
/// 0-based vertex indices, `#` comment lines and blank lines ignored.
pub fn read_edge_list<T: Scalar>(path: &Path) -> Result<Vec<(usize, usize, T)>> {
    let text = fs::read_to_string(path)?;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (u, v, w) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(u), Some(v), Some(w), None) => (u, v, w),
            _ => return Err(parse_error(path, i + 1, "expected `u v w`")),
        };
        let u: usize = u
            .parse()
            .map_err(|_| parse_error(path, i + 1, format!("bad vertex index `{u}`")))?;
        let v: usize = v
            .parse()
            .map_err(|_| parse_error(path, i + 1, format!("bad vertex index `{v}`")))?;
        let w: f64 = w
            .parse()
            .map_err(|_| parse_error(path, i + 1, format!("bad edge weight `{w}`")))?;
        if !w.is_finite() {
            return Err(parse_error(path, i + 1, "edge weight must be finite"));
        }
        edges.push((u, v, T::from_f64_lossy(w)));
    }
    Ok(edges)
}

/// Reads a `v f` volume file; vertices absent from the file have zero
/// volume. Duplicate vertex lines are summed.
pub fn read_volume_pairs(path: &Path) -> Result<Vec<(usize, u64)>> {
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (v, f) = match (parts.next(), parts.next(), parts.next()) {
            (Some(v), Some(f), None) => (v, f),
            _ => return Err(parse_error(path, i + 1, "expected `v f`")),
        };
        let v: usize = v
            .parse()
            .map_err(|_| parse_error(path, i + 1, format!("bad vertex index `{v}`")))?;
        let f: u64 = f
            .parse()
            .map_err(|_| parse_error(path, i + 1, format!("bad volume `{f}`")))?;
        pairs.push((v, f));
    }
    Ok(pairs)
}

/// Loads a graph and its volumes together. The vertex count is the smallest
/// that covers both files.
pub fn load_instance<T: Scalar>(
    edges_path: &Path,
    volumes_path: &Path,
) -> Result<(WeightedGraph<T>, VertexVolumes)> {
    let edges = read_edge_list::<T>(edges_path)?;
    let pairs = read_volume_pairs(volumes_path)?;
    let p_edges = edges
        .iter()
        .map(|&(u, v, _)| u.max(v) + 1)
        .max()
        .unwrap_or(0);
    let p_volumes = pairs.iter().map(|&(v, _)| v + 1).max().unwrap_or(0);
    let p = p_edges.max(p_volumes);
    if p == 0 {
        return Err(Error::EmptyGraph);
    }
    let graph = WeightedGraph::from_edge_list(&edges, p)?;
    let mut volumes = vec![0u64; p];
    for (v, f) in pairs {
        volumes[v] += f;
    }
    Ok((graph, VertexVolumes::new(volumes)))
}

/// Writes the graph as a `u v w` edge list with `u <= v`, one undirected
/// edge per line.
pub fn write_edge_list<T: Scalar>(path: &Path, graph: &WeightedGraph<T>) -> Result<()> {
    let mut out = String::new();
    for (u, v, w) in graph.edge_triples() {
        out.push_str(&format!("{u} {v} {}\n", format_scalar(w)));
    }
    write_atomic(path, &out)
}

/// Writes positive volumes as `v f` lines; zero-volume vertices are omitted.
pub fn write_volumes(path: &Path, volumes: &VertexVolumes) -> Result<()> {
    let mut out = String::new();
    for v in volumes.special_set() {
        out.push_str(&format!("{v} {}\n", volumes.volume(v)));
    }
    write_atomic(path, &out)
}

/// Writes an assignment as CSV with a `vertex,label` header.
pub fn write_assignment(path: &Path, assignment: &Assignment) -> Result<()> {
    let mut out = String::from("vertex,label\n");
    for (v, &l) in assignment.labels().iter().enumerate() {
        out.push_str(&format!("{v},{l}\n"));
    }
    write_atomic(path, &out)
}

/// Reads an assignment CSV; vertices must be exactly `0..p` in order.
pub fn read_assignment(path: &Path) -> Result<Assignment> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "vertex,label" => {}
        _ => return Err(parse_error(path, 1, "expected header `vertex,label`")),
    }
    let mut labels = Vec::new();
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (v, l) = line
            .split_once(',')
            .ok_or_else(|| parse_error(path, i + 1, "expected `vertex,label`"))?;
        let v: usize = v
            .trim()
            .parse()
            .map_err(|_| parse_error(path, i + 1, format!("bad vertex `{v}`")))?;
        let l: usize = l
            .trim()
            .parse()
            .map_err(|_| parse_error(path, i + 1, format!("bad label `{l}`")))?;
        if v != labels.len() {
            return Err(parse_error(
                path,
                i + 1,
                format!("expected vertex {} on this line", labels.len()),
            ));
        }
        labels.push(l);
    }
    Assignment::new(labels)
}

pub const TRACE_HEADER: &str =
    "chain,round,sweep,theta,lambda,modularity,hamiltonian,feasible,n_communities";

/// Writes every sweep record of every chain as CSV rows under
/// [`TRACE_HEADER`]. The `feasible` column is `1` when the constraint held.
pub fn write_trace_csv<T: Scalar>(path: &Path, traces: &[ChainTrace<T>]) -> Result<()> {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for (chain, trace) in traces.iter().enumerate() {
        for r in &trace.records {
            out.push_str(&format!(
                "{chain},{},{},{},{},{},{},{},{}\n",
                r.round,
                r.sweep,
                format_scalar(r.theta),
                format_scalar(r.lambda),
                format_scalar(r.modularity),
                format_scalar(r.hamiltonian),
                u8::from(!r.infeasible),
                r.community_count,
            ));
        }
    }
    write_atomic(path, &out)
}

/// A parsed trace row; see [`TRACE_HEADER`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub chain: usize,
    pub round: usize,
    pub sweep: usize,
    pub theta: f64,
    pub lambda: f64,
    pub modularity: f64,
    pub hamiltonian: f64,
    pub feasible: bool,
    pub n_communities: usize,
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TRACE_HEADER => {}
        _ => return Err(parse_error(path, 1, "unexpected trace header")),
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(parse_error(path, i + 1, "expected 9 fields"));
        }
        let bad = |what: &str| parse_error(path, i + 1, format!("bad {what}"));
        rows.push(TraceRow {
            chain: fields[0].parse().map_err(|_| bad("chain"))?,
            round: fields[1].parse().map_err(|_| bad("round"))?,
            sweep: fields[2].parse().map_err(|_| bad("sweep"))?,
            theta: fields[3].parse().map_err(|_| bad("theta"))?,
            lambda: fields[4].parse().map_err(|_| bad("lambda"))?,
            modularity: fields[5].parse().map_err(|_| bad("modularity"))?,
            hamiltonian: fields[6].parse().map_err(|_| bad("hamiltonian"))?,
            feasible: fields[7] == "1",
            n_communities: fields[8].parse().map_err(|_| bad("n_communities"))?,
        });
    }
    Ok(rows)
}

/// Writes `key: value` lines in the given order.
pub fn write_key_values(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut out = String::new();
    for (k, v) in entries {
        out.push_str(&format!("{k}: {v}\n"));
    }
    write_atomic(path, &out)
}
