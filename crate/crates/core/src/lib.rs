//! Generative-modeling engine for tabular critical-heat-flux (CHF) data.
//!
//! The crate trains denoising diffusion models — unconditional over the six
//! CHF variables, or condition-guided over CHF alone — generates synthetic
//! samples with Monte-Carlo uncertainty estimates, and validates generated
//! data statistically (correlations, ECDFs, KS distance, error statistics)
//! and physically (energy-balance reconstruction of outlet quality on top of
//! an IF97 steam-property kernel).
//!
//! Everything here is pure computation over `f64` slices and owned buffers:
//! the crate is `no_std` (with `alloc`) and fully deterministic given the
//! seeds passed in. File formats, CSV handling and the command-line surface
//! live in the companion `chfgen-cli` crate.

#![no_std]

extern crate alloc;

pub mod data;
pub mod diffusion;
pub mod math;
pub mod matrix;
pub mod metrics;
pub mod net;
pub mod physics;
pub mod rng;
pub mod schedule;
pub mod steam;

pub use data::{ChfRecord, DataSplit, FeatureMode, StandardScaler};
pub use diffusion::{Checkpoint, SampleEnsemble, TrainConfig, Trajectory};
pub use matrix::Matrix;
pub use net::{AdamState, EmaShadow, NoisePredictor, TimeEmbedding};
pub use rng::Rng;
pub use schedule::DiffusionSchedule;
pub use steam::SaturationPoint;
