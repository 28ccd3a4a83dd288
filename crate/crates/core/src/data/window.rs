use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::normalize::{NormStats, Standardizer};
use crate::error::{Error, Result};

/// One univariate lookback/target pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesWindow {
    pub lookback: Vec<f64>,
    pub target: Vec<f64>,
    pub variable_index: usize,
    /// Row of the first lookback sample inside the source view.
    pub origin_index: usize,
    pub norm: NormStats,
}

/// Number of windows per variable for a view of length `len`.
pub fn window_count(len: usize, lookback: usize, horizon: usize, stride: usize) -> usize {
    if stride == 0 || lookback + horizon > len {
        0
    } else {
        (len - lookback - horizon) / stride + 1
    }
}

/// Slide a (lookback, horizon) window over every variable of `view`.
///
/// Windows are ordered by variable, then origin.
pub fn make_windows(
    view: &Dataset,
    lookback: usize,
    horizon: usize,
    stride: usize,
) -> Result<Vec<SeriesWindow>> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    if lookback == 0 || horizon == 0 {
        return Err(Error::InvalidArgument("lookback and horizon must be positive".into()));
    }
    let len = view.len();
    if lookback + horizon > len {
        return Err(Error::InvalidArgument(format!(
            "lookback {lookback} + horizon {horizon} exceeds segment length {len}"
        )));
    }
    let per_var = window_count(len, lookback, horizon, stride);
    let mut out = Vec::with_capacity(per_var * view.num_variables());
    for (vi, var) in view.variables.iter().enumerate() {
        for w in 0..per_var {
            let start = w * stride;
            out.push(SeriesWindow {
                lookback: var.values[start..start + lookback].to_vec(),
                target: var.values[start + lookback..start + lookback + horizon].to_vec(),
                variable_index: vi,
                origin_index: start,
                norm: NormStats::IDENTITY,
            });
        }
    }
    Ok(out)
}

/// Record the per-variable normalization used to produce `windows`.
pub fn attach_norms(windows: &mut [SeriesWindow], scaler: &Standardizer) {
    for w in windows {
        w.norm = scaler.stats[w.variable_index];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;
    use proptest::prelude::*;

    fn ramp(len: usize, vars: usize) -> Dataset {
        Dataset::from_columns(
            "ramp",
            Duration::hours(1),
            (0..vars)
                .map(|v| (format!("v{v}"), (0..len).map(|i| (i + 100 * v) as f64).collect()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn length_ten_gives_five_windows() {
        let w = make_windows(&ramp(10, 2), 4, 2, 1).unwrap();
        assert_eq!(w.len(), 10);
        assert_eq!(w[0].lookback, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(w[0].target, vec![4.0, 5.0]);
        assert_eq!(w[4].origin_index, 4);
        assert_eq!(w[5].variable_index, 1);
        assert_eq!(w[5].lookback[0], 100.0);
    }

    #[test]
    fn default_protocol_shape() {
        let w = make_windows(&ramp(400, 1), 96, 96, 1).unwrap();
        assert!(w.iter().all(|w| w.lookback.len() == 96 && w.target.len() == 96));
    }

    #[test]
    fn stride_equal_to_length_yields_one_window() {
        let w = make_windows(&ramp(12, 1), 8, 4, 12).unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn too_short_segment() {
        assert!(make_windows(&ramp(5, 1), 4, 2, 1).is_err());
    }

    proptest! {
        #[test]
        fn count_formula(len in 2usize..200, l in 1usize..50, t in 1usize..50, stride in 1usize..20) {
            prop_assume!(l + t <= len);
            let w = make_windows(&ramp(len, 1), l, t, stride).unwrap();
            prop_assert_eq!(w.len(), (len - l - t) / stride + 1);
        }
    }
}
