//! Trend removal, energy-balanced frequency band decomposition and patching.
//!
//! A lookback window is split into a moving-average trend and a detrended
//! fluctuation. The fluctuation's one-sided spectrum is cut into `K` bands
//! holding roughly equal shares of energy, and each band is transformed back
//! into the time domain. The raw window plus the `K` band series form the
//! rows of a [`PatchGrid`].

mod bands;
mod detrend;
mod patch;
mod spectrum;

use serde::{Deserialize, Serialize};

pub use bands::{check_boundaries, decompose, select_boundaries};
pub use detrend::detrend;
pub use patch::{num_patches, patch, PatchGrid};
pub use spectrum::{irfft, rfft, spectrum, Spectrum, DEGENERATE_ENERGY};

use crate::error::Result;

/// Result of decomposing one lookback window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub original: Vec<f64>,
    pub trend: Vec<f64>,
    pub detrended: Vec<f64>,
    /// Band edges `λ_0..=λ_K`; empty when no bands were requested.
    pub boundaries: Vec<usize>,
    pub components: Vec<Vec<f64>>,
    /// Energy share per band (zeros for a degenerate spectrum).
    pub band_energy: Vec<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordinatorConfig {
    /// Number of frequency bands. Zero keeps only the raw window.
    pub bands: usize,
    /// Half-width of the moving-average kernel.
    pub kappa: usize,
    pub patch_len: usize,
}

impl Default for CoordinatorConfig {
    fn default() -> Self {
        CoordinatorConfig {
            bands: 1,
            kappa: 25,
            patch_len: 24,
        }
    }
}

/// Decompose `lookback` and patch the raw window followed by each band.
pub fn coordinate(lookback: &[f64], cfg: &CoordinatorConfig) -> Result<(Decomposition, PatchGrid)> {
    let decomposition = decompose_window(lookback, cfg.bands, cfg.kappa)?;
    let mut rows = Vec::with_capacity(cfg.bands + 1);
    rows.push(decomposition.original.clone());
    rows.extend(decomposition.components.iter().cloned());
    let grid = patch(&rows, cfg.patch_len)?;
    Ok((decomposition, grid))
}

/// Detrend, take the spectrum, pick band edges and reconstruct each band.
pub fn decompose_window(lookback: &[f64], bands: usize, kappa: usize) -> Result<Decomposition> {
    let (trend, detrended) = detrend(lookback, kappa)?;
    if bands == 0 {
        return Ok(Decomposition {
            original: lookback.to_vec(),
            trend,
            detrended,
            boundaries: Vec::new(),
            components: Vec::new(),
            band_energy: Vec::new(),
            degenerate: false,
        });
    }
    let spec = spectrum(&detrended)?;
    let boundaries = select_boundaries(&spec, bands)?;
    let components = decompose(&spec, &boundaries)?;
    let band_energy = boundaries
        .windows(2)
        .map(|b| spec.band_energy_fraction(b[0], b[1]))
        .collect();
    Ok(Decomposition {
        original: lookback.to_vec(),
        trend,
        detrended,
        boundaries,
        components,
        band_energy,
        degenerate: spec.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let x: Vec<f64> = (0..96).map(|t| (t as f64 * 0.3).sin()).collect();
        let cfg = CoordinatorConfig {
            bands: 2,
            kappa: 25,
            patch_len: 24,
        };
        let (d, g) = coordinate(&x, &cfg).unwrap();
        assert_eq!(g.patches.dim(), (3, 4, 24));
        assert_eq!(d.boundaries.len(), 3);
        assert_eq!(*d.boundaries.last().unwrap(), 49);
    }

    #[test]
    fn constant_window() {
        let cfg = CoordinatorConfig {
            bands: 3,
            kappa: 2,
            patch_len: 4,
        };
        let (d, g) = coordinate(&[2.5; 16], &cfg).unwrap();
        assert!(d.degenerate);
        for k in 1..=3 {
            assert!(g.unpatch(k, 16).iter().all(|v| v.abs() < 1e-12));
        }
        assert!(g.unpatch(0, 16).iter().all(|&v| v == 2.5));
    }

    #[test]
    fn bands_sum_to_detrended() {
        let x: Vec<f64> = (0..32).map(|t| ((t * 37) % 13) as f64 * 0.2 - 1.0).collect();
        let cfg = CoordinatorConfig {
            bands: 3,
            kappa: 3,
            patch_len: 8,
        };
        let (d, g) = coordinate(&x, &cfg).unwrap();
        for t in 0..32 {
            let sum: f64 = (1..=3).map(|k| g.unpatch(k, 32)[t]).sum();
            assert!((sum - d.detrended[t]).abs() < 1e-9);
            assert!((d.trend[t] + d.detrended[t] - x[t]).abs() < 1e-12);
        }
        let energy: f64 = d.band_energy.iter().sum();
        assert!((energy - 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_bands_keeps_raw_row_only() {
        let cfg = CoordinatorConfig {
            bands: 0,
            kappa: 1,
            patch_len: 4,
        };
        let (d, g) = coordinate(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], &cfg).unwrap();
        assert!(d.components.is_empty());
        assert_eq!(g.rows(), 1);
    }
}
