use crate::error::{Error, Result};

/// Centered moving average with replicate padding at both edges.
///
/// Returns `(trend, detrended)`, both the same length as `series`.
pub fn detrend(series: &[f64], kappa: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let len = series.len();
    let width = 2 * kappa + 1;
    if width > len {
        return Err(Error::InvalidArgument(format!(
            "moving-average window 2*{kappa}+1 exceeds series length {len}"
        )));
    }
    let at = |i: isize| series[i.clamp(0, len as isize - 1) as usize];
    let k = kappa as isize;
    let trend: Vec<f64> = (0..len as isize)
        .map(|t| (-k..=k).map(|j| at(t + j)).sum::<f64>() / width as f64)
        .collect();
    let detrended = series.iter().zip(&trend).map(|(x, m)| x - m).collect();
    Ok((trend, detrended))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn constant_signal_has_no_fluctuation() {
        let (trend, de) = detrend(&[5.0; 4], 1).unwrap();
        close(&trend, &[5.0; 4]);
        close(&de, &[0.0; 4]);
    }

    #[test]
    fn ramp_with_replicated_edges() {
        let (trend, de) = detrend(&[0.0, 1.0, 2.0, 3.0], 1).unwrap();
        close(&trend, &[1.0 / 3.0, 1.0, 2.0, 8.0 / 3.0]);
        close(&de, &[-1.0 / 3.0, 0.0, 0.0, 1.0 / 3.0]);
    }

    #[test]
    fn impulse_spread_over_full_width() {
        let (trend, _) = detrend(&[0.0, 0.0, 3.0, 0.0, 0.0], 2).unwrap();
        close(&trend, &[0.6; 5]);
    }

    #[test]
    fn zero_kernel_is_identity() {
        let (trend, de) = detrend(&[1.0, -2.0, 4.0], 0).unwrap();
        close(&trend, &[1.0, -2.0, 4.0]);
        close(&de, &[0.0; 3]);
    }

    #[test]
    fn kernel_too_wide() {
        assert!(detrend(&[1.0; 4], 2).is_err());
    }
}
