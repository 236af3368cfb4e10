//! Sample-space partitions and occupancy statistics.
//!
//! Three constructions are supported, matching the experimental protocol:
//!
//! - **ε-cover**: the axis-aligned grid on `[0,1]^d` with cells
//!   `{x : w(k_j−1) ≤ x_j < w·k_j}` for `k_j ∈ {1,…,1/w}`, where the last
//!   bin additionally includes its right edge so `x_j = 1` is covered.
//! - **random projection**: the pre-image of the same grid under a
//!   row-stochastic random matrix `A ∈ R^{proj_dim × d}`; since rows sum to
//!   1 and entries are nonnegative, `Ax ∈ [0,1]^{proj_dim}` whenever
//!   `x ∈ [0,1]^d`.
//! - **clustering**: nearest-centroid cells
//!   `C_k = {x : k = argmin_{k'} ‖x − x̄_{k'}‖₂}`, ties to the smallest index.
//!
//! Cells are never enumerated. Only occupied cells are stored, because the
//! total cell count `K` (e.g. `10^784` for a width-0.1 grid in 784
//! dimensions) exists only as `ln K`.

use crate::error::{domain, Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

/// Identifier of one partition cell.
///
/// Grid cells carry their per-axis bin indices (1-based); flattening to a
/// single integer would overflow 64 bits beyond 19 axes. Centroid cells
/// carry the centroid index. Equal points always map to equal ids, and ids
/// are stable across runs for a fixed configuration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CellId {
    Grid(Vec<u16>),
    Centroid(usize),
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellId::Grid(bins) => {
                let parts: Vec<String> = bins.iter().map(|b| b.to_string()).collect();
                write!(f, "{}", parts.join("-"))
            }
            CellId::Centroid(idx) => write!(f, "c{idx}"),
        }
    }
}

/// Partition scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EpsilonCover,
    RandomProjection,
    Clustering,
}

fn default_width() -> f64 {
    0.1
}

fn default_proj_dim() -> usize {
    3
}

/// Serializable partition configuration.
///
/// `width` must satisfy `1/width = integer` within 1e-9 (the grid must tile
/// `[0,1]` exactly); clustering requires nonempty centroids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub scheme: Scheme,
    pub dim: usize,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_proj_dim")]
    pub proj_dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroids: Option<Vec<Vec<f64>>>,
}

impl PartitionConfig {
    pub fn epsilon_cover(dim: usize, width: f64) -> Self {
        Self { scheme: Scheme::EpsilonCover, dim, width, proj_dim: default_proj_dim(), seed: 0, centroids: None }
    }

    pub fn random_projection(dim: usize, proj_dim: usize, width: f64, seed: u64) -> Self {
        Self { scheme: Scheme::RandomProjection, dim, width, proj_dim, seed, centroids: None }
    }

    pub fn clustering(centroids: Vec<Vec<f64>>) -> Self {
        let dim = centroids.first().map_or(0, Vec::len);
        Self { scheme: Scheme::Clustering, dim, width: default_width(), proj_dim: default_proj_dim(), seed: 0, centroids: Some(centroids) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(domain("dim must be >= 1"));
        }
        match self.scheme {
            Scheme::EpsilonCover | Scheme::RandomProjection => {
                bins_per_axis(self.width)?;
                if self.scheme == Scheme::RandomProjection && self.proj_dim == 0 {
                    return Err(domain("proj_dim must be >= 1"));
                }
            }
            Scheme::Clustering => {
                let centroids = self
                    .centroids
                    .as_ref()
                    .ok_or_else(|| domain("clustering requires centroids"))?;
                if centroids.is_empty() {
                    return Err(domain("clustering requires a nonempty centroid list"));
                }
                for (i, c) in centroids.iter().enumerate() {
                    if c.len() != self.dim {
                        return Err(domain(format!(
                            "centroid {i} has dim {}, expected {}",
                            c.len(),
                            self.dim
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Bins per axis for a grid of the given width: `round(1/width)`, rejecting
/// widths that do not evenly divide 1.
pub fn bins_per_axis(width: f64) -> Result<u16> {
    if width <= 0.0 || width > 1.0 || width.is_nan() {
        return Err(domain(format!("width = {width} must lie in (0,1]")));
    }
    let inv = 1.0 / width;
    let bins = inv.round();
    if (inv - bins).abs() > 1e-9 {
        return Err(domain(format!("1/width = {inv} is not an integer; the grid must tile [0,1] exactly")));
    }
    if bins > u16::MAX as f64 {
        return Err(domain(format!("{bins} bins per axis exceeds the supported maximum")));
    }
    Ok(bins as u16)
}

/// Assigns a point of `[0,1]^d` to its grid cell.
///
/// Bin `k_j = min(floor(x_j/width) + 1, bins)`, so interior edges belong to
/// the right-hand cell and `x_j = 1` lands in the last bin rather than a
/// phantom one past the end.
pub fn assign_epsilon_cover(x: &[f64], width: f64) -> Result<CellId> {
    let bins = bins_per_axis(width)?;
    let mut idx = Vec::with_capacity(x.len());
    for (j, &xj) in x.iter().enumerate() {
        if !(0.0..=1.0).contains(&xj) {
            return Err(domain(format!("coordinate {j} = {xj} is outside [0,1]; pre-normalize the data")));
        }
        let bin = ((xj / width).floor() as u32 + 1).min(bins as u32) as u16;
        idx.push(bin);
    }
    Ok(CellId::Grid(idx))
}

/// Builds the row-stochastic projection matrix: entries drawn uniformly
/// from `[0,1)`, then each row divided by its sum. Deterministic per seed.
pub fn build_random_projection(d: usize, proj_dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..proj_dim)
        .map(|_| {
            let mut row: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                for v in &mut row {
                    *v /= sum;
                }
            } else {
                // All-zero row has probability zero; fall back to uniform.
                let u = 1.0 / d as f64;
                row.iter_mut().for_each(|v| *v = u);
            }
            row
        })
        .collect()
}

/// Index of the nearest centroid in squared Euclidean distance, ties broken
/// by the smallest index.
pub fn assign_clustering(x: &[f64], centroids: &[Vec<f64>]) -> Result<CellId> {
    if centroids.is_empty() {
        return Err(domain("centroid list is empty"));
    }
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (k, c) in centroids.iter().enumerate() {
        if c.len() != x.len() {
            return Err(domain(format!(
                "centroid {k} has dim {}, point has dim {}",
                c.len(),
                x.len()
            )));
        }
        let d: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    Ok(CellId::Centroid(best))
}

/// A partition ready to assign points. Immutable after construction; for
/// the projection scheme the matrix is materialized once from the seed.
#[derive(Debug, Clone)]
pub struct Partition {
    config: PartitionConfig,
    projection: Option<Vec<Vec<f64>>>,
}

impl Partition {
    pub fn new(config: PartitionConfig) -> Result<Self> {
        config.validate()?;
        let projection = match config.scheme {
            Scheme::RandomProjection => {
                Some(build_random_projection(config.dim, config.proj_dim, config.seed))
            }
            _ => None,
        };
        Ok(Self { config, projection })
    }

    pub fn config(&self) -> &PartitionConfig {
        &self.config
    }

    /// The projection matrix, when the scheme uses one.
    pub fn projection_matrix(&self) -> Option<&[Vec<f64>]> {
        self.projection.as_deref()
    }

    /// Total assignment: every valid point maps to exactly one cell.
    pub fn assign(&self, x: &[f64]) -> Result<CellId> {
        if x.len() != self.config.dim {
            return Err(domain(format!(
                "point has dim {}, partition expects {}",
                x.len(),
                self.config.dim
            )));
        }
        match self.config.scheme {
            Scheme::EpsilonCover => assign_epsilon_cover(x, self.config.width),
            Scheme::RandomProjection => {
                let a = self.projection.as_ref().expect("projection materialized in new()");
                let projected: Vec<f64> = a
                    .iter()
                    .map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>().clamp(0.0, 1.0))
                    .collect();
                assign_epsilon_cover(&projected, self.config.width)
            }
            Scheme::Clustering => {
                assign_clustering(x, self.config.centroids.as_ref().expect("validated"))
            }
        }
    }

    /// `ln K` for this partition: `d·ln(bins)` for the grid,
    /// `proj_dim·ln(bins)` for the projection pre-image, `ln(#centroids)`
    /// for clustering.
    pub fn ln_cardinality(&self) -> f64 {
        ln_cardinality(&self.config).expect("validated in new()")
    }
}

/// `ln K` of the partition described by `config`.
pub fn ln_cardinality(config: &PartitionConfig) -> Result<f64> {
    config.validate()?;
    Ok(match config.scheme {
        Scheme::EpsilonCover => config.dim as f64 * (bins_per_axis(config.width)? as f64).ln(),
        Scheme::RandomProjection => {
            config.proj_dim as f64 * (bins_per_axis(config.width)? as f64).ln()
        }
        Scheme::Clustering => (config.centroids.as_ref().expect("validated").len() as f64).ln(),
    })
}

/// Sparse occupancy statistics of a sample set: per-cell counts, the total
/// sample count `n`, and the number of distinct occupied cells `|T_S|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyProfile {
    /// Serialized as (cell, count) pairs: structured map keys do not fit
    /// JSON objects.
    #[serde(with = "counts_as_pairs")]
    pub counts: BTreeMap<CellId, u64>,
    pub n: u64,
}

mod counts_as_pairs {
    use super::CellId;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(
        counts: &BTreeMap<CellId, u64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        counts.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<CellId, u64>, D::Error> {
        Ok(Vec::<(CellId, u64)>::deserialize(d)?.into_iter().collect())
    }
}

impl OccupancyProfile {
    /// Number of occupied cells.
    pub fn t_size(&self) -> u64 {
        self.counts.len() as u64
    }

    /// Occupied cells in a fixed (sorted) order; per-cell loss statistics
    /// supplied to the bound evaluators must follow this order.
    pub fn cells(&self) -> impl Iterator<Item = (&CellId, u64)> {
        self.counts.iter().map(|(c, &n)| (c, n))
    }

    /// Per-cell counts in [`Self::cells`] order.
    pub fn counts_vec(&self) -> Vec<u64> {
        self.counts.values().copied().collect()
    }

    /// Writes `cell_id,count` rows in sorted cell order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "cell_id,count")?;
        for (cell, count) in self.cells() {
            writeln!(w, "{cell},{count}")?;
        }
        Ok(())
    }
}

/// Assigns every point and aggregates per-cell counts.
///
/// Points are processed in parallel chunks; counts merge by addition, so
/// the profile is identical for any chunking or thread count. Assignment
/// failures carry the index of the offending point.
pub fn occupancy(points: &[Vec<f64>], partition: &Partition) -> Result<OccupancyProfile> {
    let merge = |mut acc: BTreeMap<CellId, u64>, more: BTreeMap<CellId, u64>| {
        for (cell, count) in more {
            *acc.entry(cell).or_insert(0) += count;
        }
        acc
    };
    let chunk_len = 4096.max(points.len() / 64 + 1);
    let counts = points
        .par_chunks(chunk_len)
        .enumerate()
        .map(|(chunk_idx, chunk)| {
            let base = chunk_idx * chunk_len;
            let mut local: BTreeMap<CellId, u64> = BTreeMap::new();
            for (offset, point) in chunk.iter().enumerate() {
                let cell = partition.assign(point).map_err(|e| Error::Assignment {
                    index: base + offset,
                    msg: e.to_string(),
                })?;
                *local.entry(cell).or_insert(0) += 1;
            }
            Ok::<_, Error>(local)
        })
        .try_reduce(BTreeMap::new, |a, b| Ok(merge(a, b)))?;
    Ok(OccupancyProfile { counts, n: points.len() as u64 })
}
