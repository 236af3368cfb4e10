//! Synthetic sample generators and CSV ingestion.
//!
//! Families (all coordinates i.i.d. unless noted, every output in `[0,1]`):
//!
//! - `beta(α, β)` — Beta-distributed coordinates.
//! - `gauss_mix(σ)` — equal-weight mixture of five Gaussians whose means are
//!   drawn uniformly in `[0,1]^d` from the seeded stream; samples clipped to
//!   the unit box. The source protocol fixes only "five components, scale σ";
//!   the mean placement is this artifact's choice.
//! - `beta_mix(α, β, σ)` — per coordinate `x = 0.4·v₀ + v₁ + v₂` with
//!   `v₀ ~ U[0,1]`, `v₁ ~ Beta(α,β)`, `v₂ ~ Beta(σ,σ)`, rescaled by `1/2.4`
//!   (the largest attainable value) to restore the unit range.
//! - `beta_gauss(α, β, σ)` — same shape with `v₂` Gaussian of deviation σ,
//!   clipped to `[0,1]` before the sum so the rescaled output stays in range.
//! - `uniform` — `U[0,1]^d`.
//!
//! CSV loading normalizes each feature to `[0,1]` by global min-max over the
//! file; zero-range features map to 0.

use crate::error::{domain, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Feature matrix plus the optional unnormalized label column.
pub type LoadedCsv = (Vec<Vec<f64>>, Option<Vec<f64>>);

/// Distribution family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Beta { alpha: f64, beta: f64 },
    GaussMix { sigma: f64 },
    BetaMix { alpha: f64, beta: f64, sigma: f64 },
    BetaGauss { alpha: f64, beta: f64, sigma: f64 },
    Uniform,
}

impl Family {
    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{name} = {v} must be positive")))
            }
        };
        match *self {
            Family::Beta { alpha, beta } => {
                positive("alpha", alpha)?;
                positive("beta", beta)
            }
            Family::GaussMix { sigma } => positive("sigma", sigma),
            Family::BetaMix { alpha, beta, sigma } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                positive("sigma", sigma)
            }
            Family::BetaGauss { alpha, beta, sigma } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                positive("sigma", sigma)
            }
            Family::Uniform => Ok(()),
        }
    }

    /// Short label used in sweep CSV output.
    pub fn label(&self) -> String {
        match self {
            Family::Beta { alpha, beta } => format!("beta({alpha},{beta})"),
            Family::GaussMix { sigma } => format!("gauss_mix({sigma})"),
            Family::BetaMix { alpha, beta, sigma } => format!("beta_mix({alpha},{beta})-({sigma})"),
            Family::BetaGauss { alpha, beta, sigma } => {
                format!("beta_gauss({alpha},{beta})-({sigma})")
            }
            Family::Uniform => "uniform".to_string(),
        }
    }
}

/// Full generator description; `generate` is deterministic per config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    #[serde(flatten)]
    pub family: Family,
    pub dim: usize,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(domain("dim must be >= 1"));
        }
        if self.n == 0 {
            return Err(domain("n must be >= 1"));
        }
        self.family.validate()
    }
}

/// Beta(α, β) draw as a ratio of two Gamma draws (Marsaglia–Tsang under the
/// hood). The degenerate 0/0 outcome, possible for tiny shapes when both
/// draws underflow, is resolved by capped resampling.
fn sample_beta<R: Rng>(rng: &mut R, ga: &Gamma<f64>, gb: &Gamma<f64>) -> f64 {
    for _ in 0..64 {
        let a = ga.sample(rng);
        let b = gb.sample(rng);
        let sum = a + b;
        if sum > 0.0 && sum.is_finite() {
            return (a / sum).clamp(0.0, 1.0);
        }
    }
    0.5
}

/// Generates the `n × dim` sample matrix; every coordinate lies in `[0,1]`.
pub fn generate(config: &GeneratorConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (n, d) = (config.n, config.dim);
    let out: Vec<Vec<f64>> = match &config.family {
        Family::Uniform => (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect(),
        Family::Beta { alpha, beta } => {
            let ga = Gamma::new(*alpha, 1.0).map_err(|e| domain(e.to_string()))?;
            let gb = Gamma::new(*beta, 1.0).map_err(|e| domain(e.to_string()))?;
            (0..n)
                .map(|_| (0..d).map(|_| sample_beta(&mut rng, &ga, &gb)).collect())
                .collect()
        }
        Family::GaussMix { sigma } => {
            let means: Vec<Vec<f64>> =
                (0..5).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
            let normal = Normal::new(0.0, *sigma).map_err(|e| domain(e.to_string()))?;
            (0..n)
                .map(|_| {
                    let comp = rng.random_range(0..5usize);
                    (0..d)
                        .map(|j| (means[comp][j] + normal.sample(&mut rng)).clamp(0.0, 1.0))
                        .collect()
                })
                .collect()
        }
        Family::BetaMix { alpha, beta, sigma } => {
            let g1a = Gamma::new(*alpha, 1.0).map_err(|e| domain(e.to_string()))?;
            let g1b = Gamma::new(*beta, 1.0).map_err(|e| domain(e.to_string()))?;
            let g2 = Gamma::new(*sigma, 1.0).map_err(|e| domain(e.to_string()))?;
            (0..n)
                .map(|_| {
                    (0..d)
                        .map(|_| {
                            let v0 = rng.random::<f64>();
                            let v1 = sample_beta(&mut rng, &g1a, &g1b);
                            let v2 = sample_beta(&mut rng, &g2, &g2);
                            (0.4 * v0 + v1 + v2) / 2.4
                        })
                        .collect()
                })
                .collect()
        }
        Family::BetaGauss { alpha, beta, sigma } => {
            let g1a = Gamma::new(*alpha, 1.0).map_err(|e| domain(e.to_string()))?;
            let g1b = Gamma::new(*beta, 1.0).map_err(|e| domain(e.to_string()))?;
            let normal = Normal::new(0.0, *sigma).map_err(|e| domain(e.to_string()))?;
            (0..n)
                .map(|_| {
                    (0..d)
                        .map(|_| {
                            let v0 = rng.random::<f64>();
                            let v1 = sample_beta(&mut rng, &g1a, &g1b);
                            let v2 = normal.sample(&mut rng).clamp(0.0, 1.0);
                            (0.4 * v0 + v1 + v2) / 2.4
                        })
                        .collect()
                })
                .collect()
        }
    };
    for row in &out {
        for &v in row {
            assert!((0.0..=1.0).contains(&v), "generator produced {v} outside [0,1]");
        }
    }
    Ok(out)
}

fn looks_numeric(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

/// Loads a numeric CSV sample file.
///
/// The header row is auto-detected (first row with any non-numeric cell is
/// skipped). When `label_last_col` is set the final column is returned
/// separately, unnormalized. All remaining features are min-max normalized
/// to `[0,1]` over the whole file; constant features map to 0.
pub fn load_csv(
    path: impl AsRef<Path>,
    expected_dim: Option<usize>,
    label_last_col: bool,
) -> Result<LoadedCsv> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: idx + 1,
            col: 0,
            msg: e.to_string(),
        })?;
        if idx == 0 && record.iter().any(|f| !looks_numeric(f)) {
            continue; // header
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row: idx + 1,
                    col: col + 1,
                    msg: format!("'{field}' is not a finite number"),
                })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(domain("CSV file contains no data rows"));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(domain("CSV rows have inconsistent widths"));
    }
    let labels = if label_last_col {
        if width < 2 {
            return Err(domain("label column requested but the file has a single column"));
        }
        Some(rows.iter_mut().map(|r| r.pop().expect("width >= 2")).collect())
    } else {
        None
    };
    let d = rows[0].len();
    if let Some(expected) = expected_dim {
        if d != expected {
            return Err(domain(format!("file has {d} feature columns, expected {expected}")));
        }
    }
    // Global per-feature min-max normalization.
    for j in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in &rows {
            lo = lo.min(r[j]);
            hi = hi.max(r[j]);
        }
        let range = hi - lo;
        for r in &mut rows {
            r[j] = if range > 0.0 { (r[j] - lo) / range } else { 0.0 };
        }
    }
    Ok((rows, labels))
}

/// Writes a sample matrix in the same plain numeric CSV format.
pub fn save_csv<W: Write>(mut w: W, matrix: &[Vec<f64>]) -> Result<()> {
    for row in matrix {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{occupancy, Partition, PartitionConfig};

    fn config(family: Family, dim: usize, n: usize, seed: u64) -> GeneratorConfig {
        GeneratorConfig { family, dim, n, seed }
    }

    /// Kolmogorov-Smirnov statistic against the U[0,1] CDF with the usual
    /// asymptotic p-value series.
    fn ks_uniform_p_value(samples: &mut [f64]) -> f64 {
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = samples.len() as f64;
        let mut d = 0.0f64;
        for (i, &x) in samples.iter().enumerate() {
            let cdf = x; // uniform CDF
            d = d.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
        }
        let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
        let mut p = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            p += 2.0 * (-1.0f64).powi(k - 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        }
        p.clamp(0.0, 1.0)
    }

    #[test]
    fn beta_1_1_is_uniform() {
        let cfg = config(Family::Beta { alpha: 1.0, beta: 1.0 }, 1, 10_000, 99);
        let data = generate(&cfg).unwrap();
        let mut flat: Vec<f64> = data.into_iter().map(|r| r[0]).collect();
        let p = ks_uniform_p_value(&mut flat);
        assert!(p >= 1e-4, "KS p-value {p} too small for Beta(1,1) vs uniform");
    }

    #[test]
    fn beta_mean_matches_analytic() {
        // mean = a/(a+b), 6-sigma Monte Carlo tolerance at n=1e5.
        for (a, b, seed) in [(0.1, 0.1, 1u64), (2.0, 5.0, 2), (0.1, 10.0, 3)] {
            let cfg = config(Family::Beta { alpha: a, beta: b }, 1, 100_000, seed);
            let data = generate(&cfg).unwrap();
            let mean: f64 = data.iter().map(|r| r[0]).sum::<f64>() / 1e5;
            let expect = a / (a + b);
            let var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
            let tol = 6.0 * (var / 1e5).sqrt();
            assert!((mean - expect).abs() < tol, "beta({a},{b}): mean {mean} vs {expect} ± {tol}");
        }
    }

    #[test]
    fn gauss_mix_tiny_sigma_occupies_few_cells() {
        let cfg = config(Family::GaussMix { sigma: 1e-6 }, 2, 2000, 17);
        let data = generate(&cfg).unwrap();
        let part = Partition::new(PartitionConfig::epsilon_cover(2, 0.1)).unwrap();
        let occ = occupancy(&data, &part).unwrap();
        // Five near-point-mass components: at most one cell each.
        assert!(occ.t_size() <= 5, "t_size = {}", occ.t_size());
    }

    #[test]
    fn mixture_families_stay_in_unit_box() {
        // The generate() post-assertion fires if anything escapes; the betamix
        // parameters of the sweep stress the extremes.
        for family in [
            Family::BetaMix { alpha: 0.1, beta: 0.1, sigma: 0.1 },
            Family::BetaMix { alpha: 0.1, beta: 10.0, sigma: 10.0 },
            Family::BetaGauss { alpha: 0.1, beta: 0.1, sigma: 10.0 },
            Family::BetaGauss { alpha: 0.1, beta: 10.0, sigma: 0.01 },
        ] {
            let cfg = config(family, 5, 1000, 23);
            let data = generate(&cfg).unwrap();
            assert_eq!(data.len(), 1000);
            assert!(data.iter().all(|r| r.len() == 5));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = config(Family::GaussMix { sigma: 0.1 }, 3, 50, 5);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let mut other = cfg.clone();
        other.seed = 6;
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(generate(&config(Family::Beta { alpha: 0.0, beta: 1.0 }, 1, 10, 0)).is_err());
        assert!(generate(&config(Family::GaussMix { sigma: -1.0 }, 1, 10, 0)).is_err());
        assert!(generate(&config(Family::Uniform, 0, 10, 0)).is_err());
        assert!(generate(&config(Family::Uniform, 2, 0, 0)).is_err());
    }

    #[test]
    fn csv_identity_load() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "0,0.5\n1,0\n0.25,1").unwrap();
        let (rows, labels) = load_csv(file.path(), Some(2), false).unwrap();
        assert!(labels.is_none());
        // Already-[0,1] columns with full range survive unchanged.
        assert_eq!(rows, vec![vec![0.0, 0.5], vec![1.0, 0.0], vec![0.25, 1.0]]);
    }

    #[test]
    fn csv_constant_column_maps_to_zero() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "3,1\n3,2\n3,4").unwrap();
        let (rows, _) = load_csv(file.path(), None, false).unwrap();
        for r in &rows {
            assert_eq!(r[0], 0.0);
        }
        assert_eq!(rows[2][1], 1.0);
    }

    #[test]
    fn csv_hand_normalization() {
        // Columns: [2,4,6] -> [0,0.5,1]; [10,0,5] -> [1,0,0.5].
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "x,y\n2,10\n4,0\n6,5").unwrap();
        let (rows, _) = load_csv(file.path(), None, false).unwrap();
        assert_eq!(rows, vec![vec![0.0, 1.0], vec![0.5, 0.0], vec![1.0, 0.5]]);
    }

    #[test]
    fn csv_label_column_split() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "0.1,0.2,7\n0.3,0.4,9").unwrap();
        let (rows, labels) = load_csv(file.path(), Some(2), true).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].len(), 2);
        assert_eq!(labels.unwrap(), vec![7.0, 9.0]);
    }

    #[test]
    fn csv_parse_error_carries_position() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "1,2\n3,oops\n5,6").unwrap();
        match load_csv(file.path(), None, false) {
            Err(Error::Parse { row, col, .. }) => {
                assert_eq!((row, col), (2, 2));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_non_finite_cells() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "1,2\ninf,4").unwrap();
        match load_csv(file.path(), None, false) {
            Err(Error::Parse { row, col, .. }) => assert_eq!((row, col), (2, 1)),
            other => panic!("expected parse error, got {other:?}"),
        }
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "1,NaN").unwrap();
        assert!(load_csv(file.path(), None, false).is_err());
    }

    #[test]
    fn csv_dimension_mismatch() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "1,2\n3,4").unwrap();
        assert!(load_csv(file.path(), Some(3), false).is_err());
    }

    #[test]
    fn csv_round_trip() {
        // Columns span [0,1] so normalization is the identity.
        let matrix = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.25, 0.75]];
        let mut buf = Vec::new();
        save_csv(&mut buf, &matrix).unwrap();
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(&buf).unwrap();
        let (rows, _) = load_csv(file.path(), Some(2), false).unwrap();
        assert_eq!(rows, matrix);
    }
}
