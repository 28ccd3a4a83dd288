//! The command implementations behind the `contextst` binary.
//!
//! Each command takes a resolved [`RunConfig`], writes its artifacts into
//! `cfg.out` together with the effective configuration, and returns a short
//! JSON summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{forecastability, gaf};
use crate::config::{ImageFormat, RunConfig, WindowSelection};
use crate::context::{load_anchors, offline_anchors, HashEmbedder};
use crate::coordinator::{decompose_window, spectrum};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{checkpoint, Forecaster};
use crate::train::{
    evaluate, persistence_report, prepare_samples, train, window_dataset, zero_shot, TrainArtifacts,
};

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.out);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    cfg.write_effective(&dir)?;
    Ok(dir)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn pick_series<'a>(ds: &'a Dataset, sel: &WindowSelection) -> Result<(usize, &'a [f64])> {
    let idx = match &sel.variable {
        Some(name) => ds
            .variables
            .iter()
            .position(|v| &v.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("dataset has no variable `{name}`")))?,
        None => 0,
    };
    Ok((idx, &ds.variables[idx].values))
}

fn window_at(series: &[f64], start: usize, len: usize) -> Result<&[f64]> {
    series.get(start..start + len).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "window {start}..{} outside series of length {}",
            start + len,
            series.len()
        ))
    })
}

fn checkpoint_path(cfg: &RunConfig) -> PathBuf {
    cfg.eval
        .checkpoint
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| TrainArtifacts::in_dir(&cfg.out).checkpoint)
}

/// Decompose consecutive lookback windows of one variable.
pub fn run_decompose(cfg: &RunConfig) -> Result<Value> {
    cfg.validate()?;
    let ds = cfg.source_dataset()?;
    let dir = out_dir(cfg)?;
    let sel = &cfg.decompose.window;
    let (var, series) = pick_series(&ds, sel)?;
    let m = &cfg.model;
    let bands = if m.variant.coordinator { m.bands } else { 0 };
    let mut windows = Vec::new();
    for w in 0..sel.count.max(1) {
        let start = sel.start + w * m.lookback;
        let window = window_at(series, start, m.lookback)?;
        let d = decompose_window(window, bands, m.kappa)?;
        if cfg.decompose.csv {
            let path = dir.join(format!("decompose_{start}.csv"));
            let mut wtr = csv::Writer::from_path(&path).map_err(|e| Error::io(&path, e.into()))?;
            let mut header = vec!["t".to_string(), "original".into(), "trend".into(), "detrended".into()];
            header.extend((0..d.components.len()).map(|k| format!("band{}", k + 1)));
            let csv_err = |e: csv::Error| Error::io(&path, e.into());
            wtr.write_record(&header).map_err(csv_err)?;
            for t in 0..window.len() {
                let mut row = vec![t.to_string(), d.original[t].to_string(), d.trend[t].to_string(), d.detrended[t].to_string()];
                row.extend(d.components.iter().map(|c| c[t].to_string()));
                wtr.write_record(&row).map_err(csv_err)?;
            }
            wtr.flush().map_err(|e| Error::io(&path, e))?;
        }
        windows.push(json!({
            "start": start,
            "boundaries": d.boundaries,
            "band_energy": d.band_energy,
            "degenerate": d.degenerate,
            "components": d.components,
            "trend": d.trend,
        }));
    }
    let report = json!({
        "dataset": ds.name,
        "variable": ds.variables[var].name,
        "L": m.lookback,
        "K": bands,
        "kappa": m.kappa,
        "windows": windows,
    });
    write_json(&dir.join("decompose.json"), &report)?;
    Ok(json!({
        "windows": sel.count.max(1),
        "boundaries": report["windows"][0]["boundaries"].clone(),
    }))
}

/// Train on the source dataset and score the best checkpoint on its test split.
pub fn run_train(cfg: &RunConfig) -> Result<Value> {
    cfg.validate()?;
    let ds = cfg.source_dataset()?;
    let anchors = cfg.source_anchors(&ds)?;
    let dir = out_dir(cfg)?;
    let splits = window_dataset(&ds, &cfg.split, cfg.window_spec())?;
    let model = Forecaster::new(cfg.model.clone(), cfg.train.seed)?;
    let train_set = prepare_samples(&model, &splits.train)?;
    let val_set = prepare_samples(&model, &splits.val)?;
    let artifacts = TrainArtifacts::in_dir(&dir);
    let outcome = train(model, &train_set, &val_set, &anchors, &cfg.train, Some(&artifacts))?;
    let best = checkpoint::load(&artifacts.checkpoint)?;
    let test = prepare_samples(&best, &splits.test)?;
    let report = evaluate(&best, &test, &anchors, &cfg.eval.horizons, cfg.eval.space)?;
    write_json(&dir.join("test_report.json"), &report)?;
    Ok(json!({
        "parameters": best.params.num_parameters(),
        "epochs": outcome.history.len(),
        "steps": outcome.steps,
        "best_epoch": outcome.best_epoch,
        "best_val_mse": outcome.best_val_mse,
        "test_mse": report.mse(),
        "checkpoint": artifacts.checkpoint,
    }))
}

/// Evaluate a checkpoint on the source dataset's test split.
pub fn run_eval(cfg: &RunConfig) -> Result<Value> {
    cfg.validate()?;
    let model = checkpoint::load(checkpoint_path(cfg))?;
    let ds = cfg.source_dataset()?;
    let anchors = cfg.source_anchors(&ds)?;
    let dir = out_dir(cfg)?;
    let mut spec = cfg.window_spec();
    spec.lookback = model.config.lookback;
    spec.horizon = model.config.horizon;
    let splits = window_dataset(&ds, &cfg.split, spec)?;
    let samples = prepare_samples(&model, &splits.test)?;
    let report = evaluate(&model, &samples, &anchors, &cfg.eval.horizons, cfg.eval.space)?;
    let baseline = if cfg.eval.baseline {
        Some(persistence_report(&samples, &cfg.eval.horizons, cfg.eval.space)?)
    } else {
        None
    };
    write_json(&dir.join("eval_report.json"), &json!({ "model": report, "baseline": baseline }))?;
    Ok(json!({ "mse": report.mse(), "mae": report.mae(), "windows": report.windows }))
}

/// Evaluate a checkpoint on `data.target` without touching the weights.
pub fn run_zeroshot(cfg: &RunConfig) -> Result<Value> {
    cfg.validate()?;
    let model = checkpoint::load(checkpoint_path(cfg))?;
    let target = cfg.target_dataset()?;
    let anchors = cfg.target_anchors(&target)?;
    let dir = out_dir(cfg)?;
    let report = zero_shot(
        &model,
        &target,
        &anchors,
        &cfg.split,
        cfg.data.eval_stride,
        &cfg.eval.horizons,
        cfg.eval.space,
    )?;
    let baseline = if cfg.eval.baseline {
        let mut spec = cfg.window_spec();
        spec.lookback = model.config.lookback;
        spec.horizon = model.config.horizon;
        let splits = window_dataset(&target, &cfg.split, spec)?;
        let samples = prepare_samples(&model, &splits.test)?;
        Some(persistence_report(&samples, &cfg.eval.horizons, cfg.eval.space)?)
    } else {
        None
    };
    write_json(
        &dir.join("zeroshot_report.json"),
        &json!({ "target": target.name, "model": report, "baseline": baseline }),
    )?;
    Ok(json!({ "target": target.name, "mse": report.mse(), "mae": report.mae() }))
}

/// GAF image and forecastability scores.
pub fn run_analyze(cfg: &RunConfig) -> Result<Value> {
    cfg.validate()?;
    let ds = cfg.source_dataset()?;
    let dir = out_dir(cfg)?;
    let sel = &cfg.analyze.window;
    let (var, series) = pick_series(&ds, sel)?;
    let len = if cfg.analyze.len == 0 { cfg.model.lookback } else { cfg.analyze.len };
    let window = window_at(series, sel.start, len)?;
    let image = gaf(window)?;
    let image_path = match cfg.analyze.format {
        ImageFormat::Pgm => {
            let p = dir.join("gaf.pgm");
            image.save_pgm(&p)?;
            p
        }
        ImageFormat::Csv => {
            let p = dir.join("gaf.csv");
            image.save_csv(&p)?;
            p
        }
    };
    let window_score = if len % 2 == 0 && len >= 4 { Some(forecastability(window)?) } else { None };
    let per_variable: Vec<Value> = ds
        .variables
        .iter()
        .map(|v| {
            let even = v.values.len() & !1;
            let score = forecastability(&v.values[..even]).ok();
            json!({ "variable": v.name, "forecastability": score })
        })
        .collect();
    let dominant = if len % 2 == 0 && len >= 4 {
        let spec = spectrum(window)?;
        spec.psd
            .iter()
            .enumerate()
            .skip(1)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(bin, _)| bin)
    } else {
        None
    };
    let report = json!({
        "dataset": ds.name,
        "variable": ds.variables[var].name,
        "window": { "start": sel.start, "len": len, "forecastability": window_score, "dominant_bin": dominant },
        "variables": per_variable,
        "gaf": image_path,
    });
    write_json(&dir.join("forecastability.json"), &report)?;
    Ok(json!({ "forecastability": window_score, "gaf": image_path }))
}

/// Write an anchor file for `data.path`.
///
/// With `from` set, an anchor file produced elsewhere is validated against the
/// dataset and re-emitted in canonical form; otherwise offline hash-embedded
/// anchors are generated.
pub fn run_make_anchors(cfg: &RunConfig, from: Option<&Path>) -> Result<Value> {
    let ds = cfg.source_dataset()?;
    let dir = out_dir(cfg)?;
    let anchors = match from {
        Some(p) => load_anchors(p, &ds)?.0,
        None => offline_anchors(&ds, &cfg.data.domain, &HashEmbedder::new(cfg.model.context_dim))?,
    };
    let path = dir.join("anchors.json");
    anchors.write(&path)?;
    Ok(json!({ "anchors": path, "dim": anchors.dim, "variables": anchors.variables.len() }))
}
