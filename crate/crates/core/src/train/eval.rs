use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{RoutingCounts, RoutingStats};
use super::task::Sample;
use crate::context::AnchorSet;
use crate::error::{Error, Result};
use crate::model::Forecaster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricSpace {
    /// Standardized units (benchmark convention).
    #[default]
    Normalized,
    /// Original units, via each window's stored statistics.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonMetrics {
    pub horizon: usize,
    pub mse: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub windows: usize,
    pub space: MetricSpace,
    pub metrics: Vec<HorizonMetrics>,
    pub routing: Option<RoutingStats>,
}

impl ForecastReport {
    pub fn mse(&self) -> f64 {
        self.metrics.last().map_or(f64::NAN, |m| m.mse)
    }

    pub fn mae(&self) -> f64 {
        self.metrics.last().map_or(f64::NAN, |m| m.mae)
    }
}

fn metrics_for(preds: &[Vec<f64>], samples: &[Sample], horizons: &[usize], space: MetricSpace) -> Result<Vec<HorizonMetrics>> {
    let full = samples.first().map_or(0, |s| s.target.len());
    horizons
        .iter()
        .map(|&h| {
            if h == 0 || h > full {
                return Err(Error::InvalidArgument(format!(
                    "requested horizon {h} outside 1..={full}"
                )));
            }
            let (mut se, mut ae) = (0.0, 0.0);
            for (p, s) in preds.iter().zip(samples) {
                for t in 0..h {
                    let (yp, yt) = match space {
                        MetricSpace::Normalized => (p[t], s.target[t]),
                        MetricSpace::Raw => (s.norm.denormalize(p[t]), s.norm.denormalize(s.target[t])),
                    };
                    se += (yp - yt).powi(2);
                    ae += (yp - yt).abs();
                }
            }
            let n = (h * samples.len()) as f64;
            Ok(HorizonMetrics {
                horizon: h,
                mse: se / n,
                mae: ae / n,
            })
        })
        .collect()
}

/// Forecast every sample and score the first `h` steps for each requested `h`.
///
/// An empty `horizons` list scores the model's full horizon.
pub fn evaluate(
    model: &Forecaster,
    samples: &[Sample],
    anchors: &AnchorSet,
    horizons: &[usize],
    space: MetricSpace,
) -> Result<ForecastReport> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no windows to evaluate".into()));
    }
    if samples[0].target.len() != model.config.horizon {
        return Err(Error::Config(format!(
            "windows have horizon {}, checkpoint predicts {}",
            samples[0].target.len(),
            model.config.horizon
        )));
    }
    let outputs = samples
        .par_iter()
        .map(|s| {
            let var = anchors
                .variables
                .get(s.variable)
                .ok_or_else(|| Error::Anchors(format!("no anchor for variable index {}", s.variable)))?;
            let (trace, _) = model.forward(&s.grid, var, &anchors.global)?;
            Ok(trace)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts = RoutingCounts::new(model.config.experts, model.config.top_r);
    for t in &outputs {
        counts.add_trace(t);
    }
    let preds: Vec<Vec<f64>> = outputs.into_iter().map(|t| t.prediction.to_vec()).collect();
    let horizons = if horizons.is_empty() {
        vec![model.config.horizon]
    } else {
        horizons.to_vec()
    };
    Ok(ForecastReport {
        windows: samples.len(),
        space,
        metrics: metrics_for(&preds, samples, &horizons, space)?,
        routing: counts.stats(),
    })
}

/// Score the repeat-last-value forecast on the same samples.
pub fn persistence_report(samples: &[Sample], horizons: &[usize], space: MetricSpace) -> Result<ForecastReport> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no windows to evaluate".into()));
    }
    let preds: Vec<Vec<f64>> = samples.iter().map(|s| vec![s.last; s.target.len()]).collect();
    let horizons = if horizons.is_empty() {
        vec![samples[0].target.len()]
    } else {
        horizons.to_vec()
    };
    Ok(ForecastReport {
        windows: samples.len(),
        space,
        metrics: metrics_for(&preds, samples, &horizons, space)?,
        routing: None,
    })
}

/// Forecast a single prepared sample.
pub fn forecast(model: &Forecaster, sample: &Sample, anchors: &AnchorSet) -> Result<Array1<f64>> {
    let var = &anchors.variables[sample.variable];
    Ok(model.forward(&sample.grid, var, &anchors.global)?.0.prediction)
}
