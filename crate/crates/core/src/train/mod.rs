//! Losses, optimization and the evaluation protocols.
//!
//! Training minimizes `mean Huber + α · load balance` with Adam over
//! shuffled mini-batches; evaluation scores forecasts in normalized space by
//! default and can compare against a repeat-last-value baseline.

mod adam;
mod eval;
mod loss;
mod objective;
mod task;
mod trainer;

pub use adam::{Adam, AdamConfig};
pub use eval::{evaluate, forecast, persistence_report, ForecastReport, HorizonMetrics, MetricSpace};
pub use loss::{huber, huber_grad, huber_loss, load_balance_loss, total_loss, RoutingCounts, RoutingStats};
pub use objective::{BatchLoss, BatchObjective, Objective};
pub use task::{prepare_samples, window_dataset, Sample, WindowSpec, WindowedSplits};
pub use trainer::{train, EpochRecord, Precision, TrainArtifacts, TrainConfig, TrainOutcome};

use crate::context::AnchorSet;
use crate::data::{Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::model::Forecaster;

/// Evaluate a trained model on another dataset without any weight update.
///
/// The target is normalized with its own train-segment statistics and the
/// report covers its test segment. With the source data as target this is
/// exactly [`evaluate`] on the source test windows.
pub fn zero_shot(
    model: &Forecaster,
    target: &Dataset,
    anchors: &AnchorSet,
    split: &SplitSpec,
    stride: usize,
    horizons: &[usize],
    space: MetricSpace,
) -> Result<ForecastReport> {
    if anchors.variables.len() != target.num_variables() {
        return Err(Error::Anchors(format!(
            "{} variable anchors for {} target variables",
            anchors.variables.len(),
            target.num_variables()
        )));
    }
    let cfg = &model.config;
    let splits = window_dataset(
        target,
        split,
        WindowSpec {
            lookback: cfg.lookback,
            horizon: cfg.horizon,
            train_stride: stride,
            eval_stride: stride,
        },
    )?;
    let samples = prepare_samples(model, &splits.test)?;
    evaluate(model, &samples, anchors, horizons, space)
}
