use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Total PSD below this marks a signal as carrying no usable energy.
pub const DEGENERATE_ENERGY: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// One-sided DFT of a real signal (forward transform unnormalized).
pub fn rfft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    buf.truncate(n / 2 + 1);
    buf
}

/// Inverse of [`rfft`] for a length-`n` real signal, scaled by `1/n`.
///
/// The imaginary parts of the DC and (for even `n`) Nyquist bins are ignored.
pub fn irfft(coeffs: &[Complex64], n: usize) -> Result<Vec<f64>> {
    if coeffs.len() != n / 2 + 1 {
        return Err(Error::Shape(format!(
            "irfft of length {n} needs {} coefficients, got {}",
            n / 2 + 1,
            coeffs.len()
        )));
    }
    let mut full = vec![Complex64::new(0.0, 0.0); n];
    full[..coeffs.len()].copy_from_slice(coeffs);
    for p in 1..n.div_ceil(2) {
        full[n - p] = coeffs[p].conj();
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut full));
    let scale = 1.0 / n as f64;
    Ok(full.iter().map(|c| c.re * scale).collect())
}

/// Frequency-domain view of a detrended window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Length of the time-domain signal.
    pub len: usize,
    #[serde(skip)]
    pub coeffs: Vec<Complex64>,
    pub psd: Vec<f64>,
    /// Cumulative normalized energy; all zeros when `degenerate`.
    pub cpsd: Vec<f64>,
    pub degenerate: bool,
}

impl Spectrum {
    pub fn num_bins(&self) -> usize {
        self.psd.len()
    }

    pub fn total_energy(&self) -> f64 {
        self.psd.iter().sum()
    }

    /// Share of total energy carried by bins `[lo, hi)`.
    pub fn band_energy_fraction(&self, lo: usize, hi: usize) -> f64 {
        let total = self.total_energy();
        if total < DEGENERATE_ENERGY {
            return 0.0;
        }
        self.psd[lo..hi].iter().sum::<f64>() / total
    }
}

/// Compute the one-sided spectrum, PSD and cumulative PSD of an even-length signal.
///
/// The PSD endpoints (DC and Nyquist) are divided by `L`, interior bins by
/// `L/2`, so the PSD sums to the signal energy.
pub fn spectrum(detrended: &[f64]) -> Result<Spectrum> {
    let len = detrended.len();
    if len < 4 || len % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "spectrum needs an even length of at least 4, got {len}"
        )));
    }
    let coeffs = rfft(detrended);
    let half = len / 2;
    let psd: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(p, c)| {
            let denom = if p == 0 || p == half {
                len as f64
            } else {
                half as f64
            };
            c.norm_sqr() / denom
        })
        .collect();
    let total: f64 = psd.iter().sum();
    let degenerate = total < DEGENERATE_ENERGY;
    let cpsd = if degenerate {
        vec![0.0; psd.len()]
    } else {
        psd.iter()
            .scan(0.0, |acc, &v| {
                *acc += v;
                Some(*acc / total)
            })
            .collect()
    };
    Ok(Spectrum {
        len,
        coeffs,
        psd,
        cpsd,
        degenerate,
    })
}
