use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Variable};
use crate::error::{Error, Result};

/// Standard deviations at or below this are treated as a constant channel.
const DEGENERATE_STD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: f64,
    pub std: f64,
    /// The training segment was constant; `std` was replaced by 1.
    pub degenerate: bool,
}

impl NormStats {
    pub const IDENTITY: NormStats = NormStats {
        mean: 0.0,
        std: 1.0,
        degenerate: false,
    };

    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("cannot standardize an empty segment".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        Ok(if std <= DEGENERATE_STD {
            NormStats {
                mean,
                std: 1.0,
                degenerate: true,
            }
        } else {
            NormStats {
                mean,
                std,
                degenerate: false,
            }
        })
    }

    #[inline]
    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    #[inline]
    pub fn denormalize(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// Per-variable z-scoring fitted on a training segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub stats: Vec<NormStats>,
}

impl Standardizer {
    pub fn fit(train: &Dataset) -> Result<Self> {
        let stats = train
            .variables
            .iter()
            .map(|v| NormStats::from_values(&v.values))
            .collect::<Result<Vec<_>>>()?;
        for (v, s) in train.variables.iter().zip(&stats) {
            if s.degenerate {
                log::warn!("variable `{}` is constant on the train segment; std set to 1", v.name);
            }
        }
        Ok(Standardizer { stats })
    }

    pub fn degenerate_variables(&self) -> Vec<usize> {
        self.stats
            .iter()
            .enumerate()
            .filter(|(_, s)| s.degenerate)
            .map(|(i, _)| i)
            .collect()
    }

    fn map(&self, ds: &Dataset, f: impl Fn(&NormStats, f64) -> f64) -> Result<Dataset> {
        if ds.num_variables() != self.stats.len() {
            return Err(Error::Shape(format!(
                "standardizer fitted on {} variables, dataset has {}",
                self.stats.len(),
                ds.num_variables()
            )));
        }
        Ok(Dataset {
            name: ds.name.clone(),
            timestamps: ds.timestamps.clone(),
            frequency: ds.frequency.clone(),
            variables: ds
                .variables
                .iter()
                .zip(&self.stats)
                .map(|(v, s)| Variable {
                    name: v.name.clone(),
                    values: v.values.iter().map(|&x| f(s, x)).collect(),
                })
                .collect(),
        })
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        self.map(ds, NormStats::normalize)
    }

    pub fn inverse_transform(&self, ds: &Dataset) -> Result<Dataset> {
        self.map(ds, NormStats::denormalize)
    }
}

/// Fit on `train` and apply the same statistics to every other segment.
pub fn standardize(train: &Dataset, others: &[&Dataset]) -> Result<(Dataset, Vec<Dataset>, Standardizer)> {
    let scaler = Standardizer::fit(train)?;
    let train_n = scaler.transform(train)?;
    let others_n = others
        .iter()
        .map(|d| scaler.transform(d))
        .collect::<Result<Vec<_>>>()?;
    Ok((train_n, others_n, scaler))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;
    use proptest::prelude::*;

    fn ds(cols: Vec<Vec<f64>>) -> Dataset {
        Dataset::from_columns(
            "t",
            Duration::hours(1),
            cols.into_iter()
                .enumerate()
                .map(|(i, c)| (format!("v{i}"), c))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_point_case() {
        let (train, _, scaler) = standardize(&ds(vec![vec![2.0, 4.0]]), &[]).unwrap();
        assert_eq!(scaler.stats[0].mean, 3.0);
        assert_eq!(scaler.stats[0].std, 1.0);
        assert_eq!(train.variables[0].values, vec![-1.0, 1.0]);
    }

    #[test]
    fn constant_variable_is_flagged() {
        let scaler = Standardizer::fit(&ds(vec![vec![5.0; 4], vec![1.0, 2.0, 3.0, 4.0]])).unwrap();
        assert!(scaler.stats[0].degenerate);
        assert_eq!(scaler.stats[0].std, 1.0);
        assert_eq!(scaler.degenerate_variables(), vec![0]);
    }

    #[test]
    fn statistics_come_from_train_only() {
        let train = ds(vec![vec![0.0, 2.0]]);
        let test = ds(vec![vec![100.0, 102.0]]);
        let (_, others, _) = standardize(&train, &[&test]).unwrap();
        assert_eq!(others[0].variables[0].values, vec![99.0, 101.0]);
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(values in prop::collection::vec(-100f64..100.0, 2..64)) {
            let d = ds(vec![values.clone()]);
            let scaler = Standardizer::fit(&d).unwrap();
            let back = scaler.inverse_transform(&scaler.transform(&d).unwrap()).unwrap();
            for (a, b) in values.iter().zip(&back.variables[0].values) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn standardized_train_has_zero_mean_unit_std(values in prop::collection::vec(-50f64..50.0, 3..64)) {
            let d = ds(vec![values]);
            let (t, _, scaler) = standardize(&d, &[]).unwrap();
            prop_assume!(!scaler.stats[0].degenerate);
            let z = &t.variables[0].values;
            let n = z.len() as f64;
            let mean = z.iter().sum::<f64>() / n;
            let std = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() <= 1e-9);
            prop_assert!((std - 1.0).abs() <= 1e-9);
        }
    }
}
