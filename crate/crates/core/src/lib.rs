//! Sequential spatial point processes: a self-interaction model in which each
//! new point falls inside the union of discs around earlier points with
//! probability governed by an interaction parameter.
//!
//! The crate covers exact raster geometry, likelihood evaluation, simulation,
//! maximum-likelihood fitting with bootstrap intervals, order-aware summary
//! statistics with Monte-Carlo envelopes, and a global envelope test of
//! complete spatial randomness.

pub mod cli;
pub mod csr;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod io;
pub mod model;
pub mod optim;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod summaries;
pub mod svg;

pub use error::{Error, Result};
pub use geometry::{CoverageRaster, Point, Window};
pub use inference::{bootstrap_ci, fit, fit_with_bootstrap, log_likelihood, FitConfig, FitResult};
pub use model::{ModelParams, PointSequence};
pub use sampler::{simulate, simulate_batch, SimulationConfig};
pub use summaries::{envelope, envelopes, EnvelopeBand, EnvelopeConfig, StatisticKind};
