use rayon::prelude::*;

use crate::coordinator::PatchGrid;
use crate::data::{attach_norms, make_windows, split, Dataset, NormStats, Segments, SeriesWindow, SplitSpec, Standardizer};
use crate::error::Result;
use crate::model::Forecaster;

/// A window with its patch grid precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub grid: PatchGrid,
    pub target: Vec<f64>,
    /// Last lookback value (the persistence forecast).
    pub last: f64,
    pub variable: usize,
    pub norm: NormStats,
}

/// Decompose and patch every window with the model's coordinator settings.
pub fn prepare_samples(model: &Forecaster, windows: &[SeriesWindow]) -> Result<Vec<Sample>> {
    windows
        .par_iter()
        .map(|w| {
            Ok(Sample {
                grid: model.prepare(&w.lookback)?,
                target: w.target.clone(),
                last: *w.lookback.last().expect("non-empty lookback"),
                variable: w.variable_index,
                norm: w.norm,
            })
        })
        .collect()
}

/// Standardized train/validation/test windows of one dataset.
#[derive(Debug, Clone)]
pub struct WindowedSplits {
    pub segments: Segments,
    pub scaler: Standardizer,
    pub train: Vec<SeriesWindow>,
    pub val: Vec<SeriesWindow>,
    pub test: Vec<SeriesWindow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub lookback: usize,
    pub horizon: usize,
    pub train_stride: usize,
    pub eval_stride: usize,
}

/// Split, z-score with train statistics and window every segment.
///
/// Validation and test windows may borrow their lookback from the rows just
/// before the segment, so every forecast target lies inside its segment.
pub fn window_dataset(dataset: &Dataset, spec: &SplitSpec, windows: WindowSpec) -> Result<WindowedSplits> {
    let segments = split(dataset.len(), spec)?;
    let scaler = Standardizer::fit(&dataset.slice(segments.train.clone())?)?;
    let normalized = scaler.transform(dataset)?;
    let cut = |range: std::ops::Range<usize>, stride: usize| -> Result<Vec<SeriesWindow>> {
        let view = normalized.slice(range)?;
        let mut w = make_windows(&view, windows.lookback, windows.horizon, stride)?;
        attach_norms(&mut w, &scaler);
        Ok(w)
    };
    let train = cut(segments.train.clone(), windows.train_stride)?;
    let val = cut(Segments::with_lookback(&segments.val, windows.lookback), windows.eval_stride)?;
    let test = cut(Segments::with_lookback(&segments.test, windows.lookback), windows.eval_stride)?;
    Ok(WindowedSplits {
        segments,
        scaler,
        train,
        val,
        test,
    })
}
