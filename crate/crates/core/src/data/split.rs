use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a series is cut into train / validation / test segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SplitSpec {
    Ratio { train: f64, val: f64, test: f64 },
    FixedBorders {
        train_end: usize,
        val_end: usize,
        test_end: usize,
    },
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Ratio {
            train: 0.7,
            val: 0.1,
            test: 0.2,
        }
    }
}

impl SplitSpec {
    /// Fixed borders used by the public ETT benchmarks (12/4/4 months).
    pub fn preset(name: &str) -> Option<SplitSpec> {
        const HOUR: usize = 30 * 24;
        let month = match name.to_ascii_lowercase().as_str() {
            "etth1" | "etth2" => HOUR,
            "ettm1" | "ettm2" => HOUR * 4,
            _ => return None,
        };
        Some(SplitSpec::FixedBorders {
            train_end: 12 * month,
            val_end: 16 * month,
            test_end: 20 * month,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SplitSpec::Ratio { train, val, test } => {
                if [train, val, test].iter().any(|r| !r.is_finite() || *r < 0.0) {
                    return Err(Error::Split("ratios must be finite and non-negative".into()));
                }
                if (train + val + test - 1.0).abs() > 1e-9 {
                    return Err(Error::Split(format!(
                        "ratios sum to {}, expected 1",
                        train + val + test
                    )));
                }
            }
            SplitSpec::FixedBorders {
                train_end,
                val_end,
                test_end,
            } => {
                if !(train_end <= val_end && val_end <= test_end) {
                    return Err(Error::Split(format!(
                        "borders must be nondecreasing, got ({train_end}, {val_end}, {test_end})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Contiguous, disjoint, chronologically ordered row ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segments {
    pub train: Range<usize>,
    pub val: Range<usize>,
    pub test: Range<usize>,
}

impl Segments {
    /// Extend a segment backwards by `lookback` rows so its first forecast
    /// origin can sit at the segment start (standard benchmark windowing).
    pub fn with_lookback(range: &Range<usize>, lookback: usize) -> Range<usize> {
        range.start.saturating_sub(lookback)..range.end
    }

    /// Number of full lookback windows that end inside each segment when the
    /// preceding rows may be borrowed as context.
    pub fn lookback_origin_counts(&self, lookback: usize) -> (usize, usize, usize) {
        let count = |r: &Range<usize>| {
            let ext = Segments::with_lookback(r, lookback);
            (ext.end - ext.start + 1).saturating_sub(lookback)
        };
        (count(&self.train), count(&self.val), count(&self.test))
    }
}

pub fn split(len: usize, spec: &SplitSpec) -> Result<Segments> {
    spec.validate()?;
    let (train_end, val_end, test_end) = match *spec {
        SplitSpec::Ratio { train, test, .. } => {
            let n_train = (len as f64 * train).floor() as usize;
            let n_test = (len as f64 * test).floor() as usize;
            let n_val = len - n_train - n_test;
            (n_train, n_train + n_val, len)
        }
        SplitSpec::FixedBorders {
            train_end,
            val_end,
            test_end,
        } => {
            if test_end > len {
                return Err(Error::Split(format!(
                    "test border {test_end} exceeds series length {len}"
                )));
            }
            (train_end, val_end, test_end)
        }
    };
    let segs = Segments {
        train: 0..train_end,
        val: train_end..val_end,
        test: val_end..test_end,
    };
    for (name, r) in [("train", &segs.train), ("validation", &segs.val), ("test", &segs.test)] {
        if r.is_empty() {
            return Err(Error::Split(format!("empty {name} segment")));
        }
    }
    Ok(segs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_split_of_100() {
        let s = split(100, &SplitSpec::default()).unwrap();
        assert_eq!(s.train, 0..70);
        assert_eq!(s.val, 70..80);
        assert_eq!(s.test, 80..100);
    }

    #[test]
    fn empty_test_segment_is_an_error() {
        let spec = SplitSpec::Ratio {
            train: 0.5,
            val: 0.5,
            test: 0.0,
        };
        let err = split(100, &spec).unwrap_err();
        assert!(err.to_string().contains("empty test"));
    }

    #[test]
    fn ratios_must_sum_to_one() {
        let spec = SplitSpec::Ratio {
            train: 0.7,
            val: 0.2,
            test: 0.2,
        };
        assert!(split(100, &spec).is_err());
    }

    #[test]
    fn etth1_preset_matches_published_counts() {
        let spec = SplitSpec::preset("ETTh1").unwrap();
        let s = split(17_420, &spec).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (8640, 2880, 2880));
        assert_eq!(s.lookback_origin_counts(96), (8545, 2881, 2881));
        let m = split(69_680, &SplitSpec::preset("ettm2").unwrap()).unwrap();
        assert_eq!(m.lookback_origin_counts(96), (34_465, 11_521, 11_521));
    }

    #[test]
    fn borders_beyond_length() {
        let spec = SplitSpec::preset("etth1").unwrap();
        assert!(split(10_000, &spec).is_err());
    }
}
