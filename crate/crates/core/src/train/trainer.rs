use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::eval::{evaluate, MetricSpace};
use super::objective::BatchObjective;
use super::task::Sample;
use crate::context::AnchorSet;
use crate::error::{Error, Result};
use crate::model::{checkpoint, Forecaster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    /// Round parameters to single precision after every step.
    F32,
}

impl std::str::FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f64" | "64" | "double" => Ok(Precision::F64),
            "f32" | "32" | "single" => Ok(Precision::F32),
            _ => Err(Error::Config(format!("unknown precision `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Huber threshold.
    pub delta: f64,
    /// Load-balance weight.
    pub alpha: f64,
    pub seed: u64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Cap on optimizer steps per epoch; 0 means no cap.
    pub max_batches: usize,
    pub precision: Precision,
    /// Write `seconds = 0` in the history so logs are reproducible bytewise.
    pub deterministic: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            epochs: 10,
            batch_size: 32,
            delta: 1.0,
            alpha: 0.01,
            seed: 2024,
            patience: 3,
            max_batches: 0,
            precision: Precision::F64,
            deterministic: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.lr > 0.0) {
            return bad("train.lr must be positive");
        }
        if !(self.delta > 0.0) {
            return bad("train.delta must be positive");
        }
        if !(self.alpha >= 0.0) {
            return bad("train.alpha must be non-negative");
        }
        if self.batch_size == 0 {
            return bad("train.batch_size must be positive");
        }
        Ok(())
    }
}

/// One line of the history log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mse: f64,
    pub val_mae: f64,
    pub l_load: f64,
    pub lr: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters with the best validation MSE.
    pub model: Forecaster,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub steps: usize,
    pub stopped_early: bool,
}

/// Where training writes its artifacts.
#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub checkpoint: PathBuf,
    pub history: PathBuf,
}

impl TrainArtifacts {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        TrainArtifacts {
            checkpoint: dir.join("model.ctst"),
            history: dir.join("history.jsonl"),
        }
    }
}

fn round_to_f32(model: &mut Forecaster) {
    for s in model.params.slices_mut() {
        for v in s {
            *v = *v as f32 as f64;
        }
    }
}

/// Minimize the total loss with Adam, keeping the best-validation weights.
///
/// On a non-finite loss or gradient the last good parameters are written to
/// the checkpoint path (when given) and [`Error::Diverged`] is returned.
pub fn train(
    model: Forecaster,
    train_set: &[Sample],
    val_set: &[Sample],
    anchors: &AnchorSet,
    cfg: &TrainConfig,
    artifacts: Option<&TrainArtifacts>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let mut model = model;
    if cfg.precision == Precision::F32 {
        round_to_f32(&mut model);
    }
    let mut adam = Adam::new(
        AdamConfig {
            lr: cfg.lr,
            ..AdamConfig::default()
        },
        &model.params,
    );
    let mut history_file = match artifacts {
        Some(a) => Some(BufWriter::new(File::create(&a.history).map_err(|e| Error::io(&a.history, e))?)),
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best = model.clone();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut history = Vec::new();
    let mut steps = 0;
    let mut stopped_early = false;

    for epoch in 1..=cfg.epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        let mut batches: Vec<&[usize]> = order.chunks(cfg.batch_size).collect();
        if cfg.max_batches > 0 {
            batches.truncate(cfg.max_batches);
        }
        let (mut loss_sum, mut load_sum, mut seen) = (0.0, 0.0, 0usize);
        for (b, idx) in batches.iter().enumerate() {
            let objective = BatchObjective {
                model: &model,
                samples: idx.iter().map(|&i| &train_set[i]).collect(),
                anchors,
                delta: cfg.delta,
                alpha: cfg.alpha,
            };
            let outcome = objective.gradient(&model);
            let (loss, grad) = match outcome {
                Ok((loss, grad)) if loss.total.is_finite() && grad.all_finite() => (loss, grad),
                Ok(_) | Err(Error::NonFinite { .. }) => {
                    if let Some(a) = artifacts {
                        checkpoint::save(&a.checkpoint, &model)?;
                    }
                    return Err(Error::Diverged { epoch, step: b + 1 });
                }
                Err(e) => return Err(e),
            };
            adam.step(&mut model.params, &grad);
            if cfg.precision == Precision::F32 {
                round_to_f32(&mut model);
            }
            steps += 1;
            loss_sum += loss.total * idx.len() as f64;
            load_sum += loss.routing.map_or(0.0, |r| r.l_load) * idx.len() as f64;
            seen += idx.len();
        }

        let (val_mse, val_mae) = if val_set.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            match evaluate(&model, val_set, anchors, &[], MetricSpace::Normalized) {
                Ok(r) => (r.mse(), r.mae()),
                Err(Error::NonFinite { .. }) => {
                    if let Some(a) = artifacts {
                        checkpoint::save(&a.checkpoint, &best)?;
                    }
                    return Err(Error::Diverged { epoch, step: batches.len() });
                }
                Err(e) => return Err(e),
            }
        };
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / seen as f64,
            val_mse,
            val_mae,
            l_load: load_sum / seen as f64,
            lr: cfg.lr,
            seconds: if cfg.deterministic { 0.0 } else { started.elapsed().as_secs_f64() },
        };
        log::info!(
            "epoch {epoch}: train {:.6} val mse {:.6} mae {:.6} load {:.4}",
            record.train_loss,
            record.val_mse,
            record.val_mae,
            record.l_load
        );
        if let Some(f) = history_file.as_mut() {
            let path = &artifacts.expect("artifacts").history;
            serde_json::to_writer(&mut *f, &record)?;
            writeln!(f).and_then(|_| f.flush()).map_err(|e| Error::io(path, e))?;
        }
        history.push(record);

        // Without a validation set every epoch counts as an improvement.
        let improved = val_set.is_empty() || val_mse < best_val;
        if improved {
            if !val_set.is_empty() {
                best_val = val_mse;
            }
            best_epoch = epoch;
            best = model.clone();
            since_best = 0;
            if let Some(a) = artifacts {
                checkpoint::save(&a.checkpoint, &best)?;
            }
        } else {
            since_best += 1;
            if cfg.patience > 0 && since_best >= cfg.patience {
                stopped_early = epoch < cfg.epochs;
                break;
            }
        }
    }

    if history.is_empty() {
        if let Some(a) = artifacts {
            checkpoint::save(&a.checkpoint, &best)?;
        }
    }
    Ok(TrainOutcome {
        model: best,
        history,
        best_epoch,
        best_val_mse: if val_set.is_empty() { f64::NAN } else { best_val },
        steps,
        stopped_early,
    })
}
