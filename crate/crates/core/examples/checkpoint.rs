//! Train briefly, save a checkpoint and reload it for inference.

use contextst::experiments::transfer_config;
use contextst::model::{checkpoint, Forecaster};
use contextst::train::{evaluate, prepare_samples, train, window_dataset, MetricSpace, TrainArtifacts};

fn main() -> contextst::Result<()> {
    let mut cfg = transfer_config();
    cfg.train.epochs = 2;
    let data = cfg.source_dataset()?;
    let anchors = cfg.source_anchors(&data)?;
    let splits = window_dataset(&data, &cfg.split, cfg.window_spec())?;

    let model = Forecaster::new(cfg.model.clone(), 0)?;
    let train_set = prepare_samples(&model, &splits.train)?;
    let val_set = prepare_samples(&model, &splits.val)?;
    let dir = std::env::temp_dir().join("contextst-checkpoint-example");
    std::fs::create_dir_all(&dir).map_err(|e| contextst::Error::Config(e.to_string()))?;
    let artifacts = TrainArtifacts::in_dir(&dir);
    train(model, &train_set, &val_set, &anchors, &cfg.train, Some(&artifacts))?;

    let restored = checkpoint::load(&artifacts.checkpoint)?;
    println!(
        "restored {} parameters from {}",
        restored.params.num_parameters(),
        artifacts.checkpoint.display()
    );
    let test = prepare_samples(&restored, &splits.test)?;
    let report = evaluate(&restored, &test, &anchors, &[6, 12, 24], MetricSpace::Normalized)?;
    for m in &report.metrics {
        println!("horizon {:>2}: mse {:.4} mae {:.4}", m.horizon, m.mse, m.mae);
    }
    Ok(())
}
