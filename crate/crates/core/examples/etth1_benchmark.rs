//! Desk-scale ETTh1 96 -> 96 run with the published configuration.
//!
//!     CONTEXTST_DATA_DIR=/data cargo run --release --example etth1_benchmark -- [epochs]

use contextst::config::RunConfig;
use contextst::model::Forecaster;
use contextst::train::{evaluate, persistence_report, prepare_samples, train, window_dataset, MetricSpace};

fn main() -> contextst::Result<()> {
    let epochs = std::env::args().nth(1).unwrap_or_else(|| "3".into());
    let cfg = RunConfig::from_text(&format!(
        "model.preset = etth1\nsplit.preset = etth1\ndata.path = ETTh1.csv\ndata.domain = electricity\n\
         train.epochs = {epochs}\ntrain.batch_size = 32\ntrain.max_batches = 200\ndata.eval_stride = 1\n"
    ))?;
    let data = cfg.source_dataset()?;
    let anchors = cfg.source_anchors(&data)?;
    let splits = window_dataset(&data, &cfg.split, cfg.window_spec())?;
    let model = Forecaster::new(cfg.model.clone(), cfg.train.seed)?;
    println!("{} parameters", model.params.num_parameters());
    let train_set = prepare_samples(&model, &splits.train)?;
    let val_set = prepare_samples(&model, &splits.val)?;
    let outcome = train(model, &train_set, &val_set, &anchors, &cfg.train, None)?;
    let test = prepare_samples(&outcome.model, &splits.test)?;
    let report = evaluate(&outcome.model, &test, &anchors, &[], MetricSpace::Normalized)?;
    let base = persistence_report(&test, &[], MetricSpace::Normalized)?;
    println!("test mse {:.4} mae {:.4} (repeat-last {:.4})", report.mse(), report.mae(), base.mse());
    Ok(())
}
