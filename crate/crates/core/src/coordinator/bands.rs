use rustfft::num_complex::Complex64;

use super::spectrum::{irfft, Spectrum};
use crate::error::{Error, Result};

/// Energy-balanced band edges `λ_0 = 0 < … ≤ λ_K = bins`.
///
/// Interior edges are the first bin whose cumulative energy reaches `k/K`.
/// An edge that collides with its predecessor is pushed one bin further
/// (clamped at the bin count), which may leave trailing bands empty. A
/// degenerate spectrum falls back to `K` equal-width ranges.
pub fn select_boundaries(spectrum: &Spectrum, k: usize) -> Result<Vec<usize>> {
    let bins = spectrum.num_bins();
    if k == 0 || k > spectrum.len / 2 {
        return Err(Error::InvalidArgument(format!(
            "band count {k} must be in 1..={}",
            spectrum.len / 2
        )));
    }
    let mut edges = Vec::with_capacity(k + 1);
    edges.push(0);
    if spectrum.degenerate {
        edges.extend((1..k).map(|j| j * bins / k));
    } else {
        for j in 1..k {
            let level = j as f64 / k as f64;
            let raw = spectrum
                .cpsd
                .iter()
                .position(|&c| c >= level)
                .unwrap_or(bins);
            let prev = *edges.last().expect("edges start with 0");
            edges.push(if raw <= prev { (prev + 1).min(bins) } else { raw });
        }
    }
    edges.push(bins);
    Ok(edges)
}

/// Validate edges for a spectrum with `bins` bins.
pub fn check_boundaries(edges: &[usize], bins: usize) -> Result<()> {
    let ok = edges.len() >= 2
        && edges[0] == 0
        && *edges.last().unwrap() == bins
        && edges.windows(2).all(|w| w[0] <= w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "invalid band edges {edges:?} for {bins} bins"
        )))
    }
}

/// Reconstruct one time-domain series per band `[λ_{k-1}, λ_k)`.
pub fn decompose(spectrum: &Spectrum, edges: &[usize]) -> Result<Vec<Vec<f64>>> {
    check_boundaries(edges, spectrum.num_bins())?;
    let zero = Complex64::new(0.0, 0.0);
    edges
        .windows(2)
        .map(|band| {
            let masked: Vec<Complex64> = spectrum
                .coeffs
                .iter()
                .enumerate()
                .map(|(p, &c)| if (band[0]..band[1]).contains(&p) { c } else { zero })
                .collect();
            irfft(&masked, spectrum.len)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coordinator::spectrum::spectrum;
    use std::f64::consts::PI;

    fn from_psd(psd: Vec<f64>) -> Spectrum {
        let total: f64 = psd.iter().sum();
        let cpsd = psd
            .iter()
            .scan(0.0, |a, v| {
                *a += v;
                Some(*a / total)
            })
            .collect();
        Spectrum {
            len: 2 * (psd.len() - 1),
            coeffs: vec![Complex64::new(0.0, 0.0); psd.len()],
            psd,
            cpsd,
            degenerate: false,
        }
    }

    #[test]
    fn single_band_covers_everything() {
        let s = from_psd(vec![1.0; 5]);
        assert_eq!(select_boundaries(&s, 1).unwrap(), vec![0, 5]);
    }

    #[test]
    fn concentrated_energy() {
        let s = from_psd(vec![0.0, 0.0, 0.0, 2.0, 0.0]);
        assert_eq!(select_boundaries(&s, 2).unwrap(), vec![0, 3, 5]);
    }

    #[test]
    fn uniform_energy() {
        let s = from_psd(vec![1.0; 5]);
        assert_eq!(select_boundaries(&s, 2).unwrap(), vec![0, 2, 5]);
    }

    #[test]
    fn collisions_are_pushed_forward() {
        // all energy at DC: every raw edge is 0
        let s = from_psd(vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(select_boundaries(&s, 4).unwrap(), vec![0, 1, 2, 3, 5]);
        // all energy at the last bin with many bands clamps at the end
        let s = from_psd(vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(select_boundaries(&s, 4).unwrap(), vec![0, 4, 5, 5, 5]);
    }

    #[test]
    fn degenerate_falls_back_to_equal_ranges() {
        let s = spectrum(&[0.0; 16]).unwrap();
        assert_eq!(select_boundaries(&s, 3).unwrap(), vec![0, 3, 6, 9]);
    }

    #[test]
    fn too_many_bands() {
        let s = from_psd(vec![1.0; 5]);
        assert!(select_boundaries(&s, 5).is_err());
        assert!(select_boundaries(&s, 0).is_err());
    }

    #[test]
    fn separates_two_cosines() {
        let x: Vec<f64> = (0..8)
            .map(|t| (2.0 * PI * t as f64 / 8.0).cos() + (6.0 * PI * t as f64 / 8.0).cos())
            .collect();
        let s = spectrum(&x).unwrap();
        let parts = decompose(&s, &[0, 2, 5]).unwrap();
        for t in 0..8 {
            assert!((parts[0][t] - (2.0 * PI * t as f64 / 8.0).cos()).abs() < 1e-9);
            assert!((parts[1][t] - (6.0 * PI * t as f64 / 8.0).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn one_band_is_identity() {
        let x: Vec<f64> = (0..10).map(|t| ((t * t) % 7) as f64 - 3.0).collect();
        let s = spectrum(&x).unwrap();
        let parts = decompose(&s, &[0, 6]).unwrap();
        for (a, b) in parts[0].iter().zip(&x) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
