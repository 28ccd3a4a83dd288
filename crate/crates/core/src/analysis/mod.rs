//! Gramian Angular Field imaging and a spectral-entropy forecastability score.

mod forecastability;
mod gaf;

pub use forecastability::{forecastability, forecastability_from_psd};
pub use gaf::{gaf, rescale, GafMatrix};
