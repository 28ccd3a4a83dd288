//! Cross-domain time-series forecasting with frequency-band decomposition,
//! context anchors and context-informed mixture-of-experts routing.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`data`] loads benchmark CSVs, splits, standardizes and windows them.
//! 2. [`coordinator`] detrends each lookback window and splits it into `K`
//!    energy-balanced frequency bands, then patches every band.
//! 3. [`context`] loads global and per-variable embedding vectors and maps
//!    them into model space.
//! 4. [`model`] runs the transformer: per-component attention and a
//!    mixture-of-experts whose router is conditioned on the global anchor.
//! 5. [`train`] fits the model with Huber and load-balancing losses and
//!    evaluates it in-domain or zero-shot on another dataset.
//!
//! [`analysis`] adds Gramian angular fields and a spectral forecastability
//! score. The `contextst` binary wraps all of this behind subcommands.

pub mod analysis;
pub mod app;
pub mod config;
pub mod context;
pub mod coordinator;
pub mod data;
pub mod experiments;
mod error;
pub mod model;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};
