use ndarray::{ArrayView2, Zip};

use crate::error::{Error, Result};

fn check(pred: &ArrayView2<f64>, truth: &ArrayView2<f64>) -> Result<()> {
    if pred.dim() != truth.dim() {
        return Err(Error::Shape(format!(
            "prediction {:?} vs truth {:?}",
            pred.dim(),
            truth.dim()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Shape("empty metric input".into()));
    }
    Ok(())
}

/// Mean squared error over all entries.
pub fn mse(pred: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    check(&pred, &truth)?;
    let sum = Zip::from(&pred)
        .and(&truth)
        .fold(0.0, |acc, p, t| acc + (p - t) * (p - t));
    Ok(sum / pred.len() as f64)
}

/// Mean absolute error over all entries.
pub fn mae(pred: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    check(&pred, &truth)?;
    let sum = Zip::from(&pred)
        .and(&truth)
        .fold(0.0, |acc, p, t| acc + (p - t).abs());
    Ok(sum / pred.len() as f64)
}
