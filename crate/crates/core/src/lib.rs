//! k-means seeding, refinement and consistency experiments.
//!
//! The crate is organised bottom-up:
//!
//! - [`dataset`]: point sets carrying the uniform empirical measure, Gaussian
//!   grid mixtures and CSV I/O.
//! - [`cost`]: nearest-center distance, assignments and the two forms of the
//!   k-means cost (mean over the empirical measure, and the raw sum).
//! - [`seeding`]: k-means++ (D² sampling) and uniform random seeding.
//! - [`lloyd`]: Lloyd refinement with a deterministic empty-cluster rule.
//! - [`oracle`]: exact enumeration of the k-means++ seeding distribution and
//!   brute-force optimal partitions for small instances.
//! - [`experiments`]: Monte Carlo expectations, the sample-size convergence
//!   study and the approximation-bound suite.
//! - [`report`]: Voronoi SVG figures and study CSV/JSON output.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the experiment harness
//! uses.

pub mod cost;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod lloyd;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod seeding;

pub use cost::{assign, cost_empirical, cost_matrix_form, dist_to_set, Assignment, CenterSet};
pub use dataset::{Component, Dataset, MixtureSpec};
pub use error::{Error, Result};
pub use lloyd::{lloyd_refine, LloydConfig, LloydTrace};
pub use scalar::Scalar;
pub use seeding::{seed_plusplus, seed_uniform, SeedingConfig, Strategy};

/// Double-precision dataset, the default for experiments.
pub type Dataset64 = Dataset<f64>;
/// Single-precision dataset.
pub type Dataset32 = Dataset<f32>;
pub type CenterSet64 = CenterSet<f64>;
pub type CenterSet32 = CenterSet<f32>;
pub type LloydTrace64 = LloydTrace<f64>;
pub type SeedingOutcome64 = oracle::SeedingOutcome<f64>;
pub type OptimalClustering64 = oracle::OptimalClustering<f64>;
