//! Data-dependent generalization bounds for robust learning algorithms.
//!
//! A learning algorithm is `(K, ε(·))`-robust when the sample space splits
//! into `K` disjoint cells such that the loss of the returned hypothesis
//! varies by at most `ε(S)` between any training point and any test point
//! sharing a cell. Classical generalization bounds for robust algorithms pay
//! `√K`; the data-dependent refinements implemented here pay only
//! `√(|T_S| ln K)`, where `|T_S|` is the number of cells actually occupied
//! by the training sample — a quantity that is often exponentially smaller
//! than `K`.
//!
//! The crate provides:
//!
//! - [`concentration`] — closed-form multinomial concentration inequalities
//!   (classical and occupancy-weighted), evaluated in overflow-safe log
//!   space so that `K = 10^784` is a perfectly ordinary input.
//! - [`partition`] — ε-cover grids, random-projection pre-images, and
//!   nearest-centroid partitions, with sparse occupancy statistics.
//! - [`bounds`] — term-by-term generalization-bound reports (prior covering
//!   bound, occupancy bounds, pseudo-robust variants, uniform-stability
//!   baseline) plus the occupancy-decay bound for power-law cell masses.
//! - [`robustness`] — robustness certificates for Lipschitz, lasso, and PCA
//!   learners, with small reference solvers and the exact loss-decomposition
//!   identity used to validate them.
//! - [`simulate`] — a seeded, parallel Monte Carlo engine for coverage
//!   testing every inequality and for occupancy simulation.
//! - [`datagen`] — the synthetic generators used by the sweep experiments
//!   and a generic CSV sample loader.
//! - [`cli`] — the sweep/verification commands behind the `robustgen`
//!   binary; they emit CSV tables and SVG plots.
//!
//! Every randomized routine takes an explicit 64-bit seed and is
//! reproducible bit-for-bit regardless of thread count.
//!
//! ```
//! use robustgen::bounds::{theorem1_bound, LossProfile};
//! use robustgen::partition::{occupancy, Partition, PartitionConfig};
//!
//! # fn main() -> robustgen::Result<()> {
//! // 200 points on a diagonal strip of [0,1]^2, width-0.1 grid cells.
//! let points: Vec<Vec<f64>> =
//!     (0..200).map(|i| vec![i as f64 / 200.0, i as f64 / 250.0]).collect();
//! let partition = Partition::new(PartitionConfig::epsilon_cover(2, 0.1))?;
//! let occ = occupancy(&points, &partition)?;
//! assert!(occ.t_size() < 100); // far fewer occupied cells than K = 100
//!
//! let losses = vec![0.05; 200];
//! let loss = LossProfile::new(losses, 1.0)?; // zeta: loss sup of the hypothesis
//! let report =
//!     theorem1_bound(&loss, 0.02, &occ, partition.ln_cardinality(), 0.05, 200)?;
//! assert!(report.total.is_finite());
//! # Ok(())
//! # }
//! ```
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod bounds;
pub mod cli;
pub mod concentration;
pub mod datagen;
pub mod error;
pub mod partition;
pub mod plot;
pub mod robustness;
pub mod simulate;

pub use error::{Error, Result};
