use crate::coordinator::spectrum;
use crate::error::{Error, Result};

/// `1 − H(q) / ln(bins)` where `q` is the PSD without its DC bin, normalized
/// to sum to one. Pure tones score 1, white spectra 0.
pub fn forecastability(series: &[f64]) -> Result<f64> {
    let spec = spectrum(series)?;
    forecastability_from_psd(&spec.psd[1..])
}

/// Score an already computed (DC-free) power spectrum.
pub fn forecastability_from_psd(psd: &[f64]) -> Result<f64> {
    if psd.len() < 2 {
        return Err(Error::InvalidArgument("forecastability needs at least two bins".into()));
    }
    if psd.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidArgument("power spectrum must be finite and non-negative".into()));
    }
    let total: f64 = psd.iter().sum();
    if total <= 1e-12 {
        return Err(Error::InvalidArgument(
            "forecastability of a zero-energy series is undefined".into(),
        ));
    }
    let entropy: f64 = psd
        .iter()
        .map(|p| p / total)
        .filter(|q| *q > 0.0)
        .map(|q| -q * q.ln())
        .sum();
    Ok((1.0 - entropy / (psd.len() as f64).ln()).clamp(0.0, 1.0))
}
