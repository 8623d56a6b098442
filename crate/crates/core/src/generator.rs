//! Synthetic planted-partition instances with configurable special-vertex
//! volumes, for desk-scale validation of the optimizer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::{VertexVolumes, WeightedGraph};
use crate::sampler::chain_rng;
use crate::scalar::Scalar;

/// Parameters of a planted-partition instance. Edges appear independently
/// with probability `p_in` inside a block and `p_out` between blocks, with
/// integer weights drawn uniformly from the given range. Each block receives
/// a fixed quota of special vertices whose volumes are drawn uniformly from
/// the volume range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub weight_min: u32,
    pub weight_max: u32,
    pub specials_per_block: Vec<usize>,
    pub volume_min: u64,
    pub volume_max: u64,
    pub seed: u64,
}

impl PlantedSpec {
    pub fn vertex_count(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() || self.block_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter(
                "every block must contain at least one vertex".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_out)
            || !(0.0..=1.0).contains(&self.p_in)
            || self.p_out >= self.p_in
        {
            return Err(Error::InvalidParameter(
                "edge probabilities must satisfy 0 <= p_out < p_in <= 1".into(),
            ));
        }
        if self.weight_min > self.weight_max || self.weight_min == 0 {
            return Err(Error::InvalidParameter(
                "weight range must satisfy 1 <= weight_min <= weight_max".into(),
            ));
        }
        if self.specials_per_block.len() != self.block_sizes.len() {
            return Err(Error::InvalidParameter(
                "one special-vertex quota per block is required".into(),
            ));
        }
        if self
            .specials_per_block
            .iter()
            .zip(self.block_sizes.iter())
            .any(|(&q, &s)| q > s)
        {
            return Err(Error::InvalidParameter(
                "special-vertex quota exceeds block size".into(),
            ));
        }
        if self.volume_min > self.volume_max || self.volume_min == 0 {
            return Err(Error::InvalidParameter(
                "volume range must satisfy 1 <= volume_min <= volume_max".into(),
            ));
        }
        Ok(())
    }
}

/// Generates the instance: the weighted graph, the vertex volumes, and the
/// planted block assignment as ground truth. Deterministic in the seed.
pub fn generate<T: Scalar>(
    spec: &PlantedSpec,
) -> Result<(WeightedGraph<T>, VertexVolumes, Assignment)> {
    spec.validate()?;
    let p = spec.vertex_count();
    let mut block_of = Vec::with_capacity(p);
    for (b, &size) in spec.block_sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, size));
    }

    let mut rng = chain_rng(spec.seed, 0);
    let mut edges: Vec<(usize, usize, T)> = Vec::new();
    for u in 0..p {
        for v in u + 1..p {
            let prob = if block_of[u] == block_of[v] {
                spec.p_in
            } else {
                spec.p_out
            };
            if rng.random::<f64>() < prob {
                let w = rng.random_range(spec.weight_min..=spec.weight_max);
                edges.push((u, v, T::from_u64_lossy(u64::from(w))));
            }
        }
    }

    let mut volumes = vec![0u64; p];
    let mut start = 0;
    for (b, &size) in spec.block_sizes.iter().enumerate() {
        let mut members: Vec<usize> = (start..start + size).collect();
        // Partial Fisher-Yates: the first `quota` entries are the specials.
        for i in 0..spec.specials_per_block[b].min(size.saturating_sub(1)) {
            let j = rng.random_range(i..size);
            members.swap(i, j);
        }
        for &v in members.iter().take(spec.specials_per_block[b]) {
            volumes[v] = rng.random_range(spec.volume_min..=spec.volume_max);
        }
        start += size;
    }

    let graph = WeightedGraph::from_edge_list(&edges, p)?;
    let truth = Assignment::new(block_of)?;
    Ok((graph, VertexVolumes::new(volumes), truth))
}
