use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Gramian Angular (summation) Field of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct GafMatrix {
    /// Rescaled series in `[-1, 1]`.
    pub scaled: Vec<f64>,
    pub values: Array2<f64>,
}

/// Min-max rescale into `[-1, 1]`.
pub fn rescale(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("GAF needs at least two points".into()));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("GAF input contains non-finite values".into()));
    }
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > min) {
        return Err(Error::InvalidArgument(
            "GAF of a constant series is undefined (max == min)".into(),
        ));
    }
    Ok(series
        .iter()
        .map(|x| (((x - max) + (x - min)) / (max - min)).clamp(-1.0, 1.0))
        .collect())
}

/// `GAF(i, j) = cos(φ_i + φ_j)` with `φ = arccos(x̃)`, evaluated in the
/// algebraic form `x̃_i x̃_j − √(1−x̃_i²) √(1−x̃_j²)`.
pub fn gaf(series: &[f64]) -> Result<GafMatrix> {
    let scaled = rescale(series)?;
    let sines: Vec<f64> = scaled.iter().map(|x| (1.0 - x * x).max(0.0).sqrt()).collect();
    let n = scaled.len();
    let values = Array2::from_shape_fn((n, n), |(i, j)| scaled[i] * scaled[j] - sines[i] * sines[j]);
    Ok(GafMatrix { scaled, values })
}

impl GafMatrix {
    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    /// Binary PGM (P5) with `[-1, 1]` mapped linearly onto `[0, 255]`.
    pub fn write_pgm(&self, mut out: impl Write) -> std::io::Result<()> {
        let n = self.len();
        write!(out, "P5\n{n} {n}\n255\n")?;
        let bytes: Vec<u8> = self
            .values
            .iter()
            .map(|v| ((v.clamp(-1.0, 1.0) + 1.0) * 127.5).round() as u8)
            .collect();
        out.write_all(&bytes)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.values.rows() {
            w.write_record(row.iter().map(|v| format!("{v}")))
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_pgm(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}
