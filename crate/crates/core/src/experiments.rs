//! Ready-made experiments on the synthetic sine domains.
//!
//! Domain A (periods 24 and 8) is the training source and domain B
//! (periods 12 and 6) the unseen target. Both carry their own offline anchors.

use serde::Serialize;

use crate::config::RunConfig;
use crate::data::Dataset;
use crate::error::Result;
use crate::model::{Forecaster, ModelConfig};
use crate::train::{
    evaluate, persistence_report, prepare_samples, train, window_dataset, EpochRecord, ForecastReport,
    Precision, TrainConfig,
};

/// Small model and short schedule that train in about half a minute.
pub fn transfer_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.model = ModelConfig {
        bands: 2,
        patch_len: 12,
        lookback: 48,
        horizon: 24,
        d_model: 16,
        heads: 2,
        blocks: 1,
        experts: 4,
        top_r: 2,
        context_dim: 16,
        kappa: 3,
        ..ModelConfig::default()
    };
    cfg.train = TrainConfig {
        lr: 3e-3,
        epochs: 20,
        batch_size: 32,
        patience: 5,
        precision: Precision::F64,
        ..TrainConfig::default()
    };
    cfg.data.path = Some("synthetic:a".into());
    cfg.data.target = Some("synthetic:b".into());
    cfg.data.domain = "synthetic oscillation".into();
    cfg.data.target_domain = "synthetic oscillation".into();
    cfg.data.synthetic_len = 1200;
    cfg.data.stride = 2;
    cfg.data.eval_stride = 1;
    cfg
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferResult {
    pub history: Vec<EpochRecord>,
    pub in_domain: ForecastReport,
    pub in_domain_baseline: ForecastReport,
    pub zero_shot: ForecastReport,
    pub zero_shot_baseline: ForecastReport,
}

fn test_reports(cfg: &RunConfig, model: &Forecaster, ds: &Dataset, target: bool) -> Result<(ForecastReport, ForecastReport)> {
    let anchors = if target { cfg.target_anchors(ds)? } else { cfg.source_anchors(ds)? };
    let splits = window_dataset(ds, &cfg.split, cfg.window_spec())?;
    let samples = prepare_samples(model, &splits.test)?;
    Ok((
        evaluate(model, &samples, &anchors, &cfg.eval.horizons, cfg.eval.space)?,
        persistence_report(&samples, &cfg.eval.horizons, cfg.eval.space)?,
    ))
}

/// Train on `data.path`, then score in-domain and zero-shot on `data.target`.
pub fn run_transfer(cfg: &RunConfig) -> Result<TransferResult> {
    cfg.validate()?;
    let source = cfg.source_dataset()?;
    let target = cfg.target_dataset()?;
    let anchors = cfg.source_anchors(&source)?;
    let splits = window_dataset(&source, &cfg.split, cfg.window_spec())?;
    let model = Forecaster::new(cfg.model.clone(), cfg.train.seed)?;
    let train_set = prepare_samples(&model, &splits.train)?;
    let val_set = prepare_samples(&model, &splits.val)?;
    let outcome = train(model, &train_set, &val_set, &anchors, &cfg.train, None)?;
    let (in_domain, in_domain_baseline) = test_reports(cfg, &outcome.model, &source, false)?;
    let (zero_shot, zero_shot_baseline) = test_reports(cfg, &outcome.model, &target, true)?;
    Ok(TransferResult {
        history: outcome.history,
        in_domain,
        in_domain_baseline,
        zero_shot,
        zero_shot_baseline,
    })
}
