use ndarray::{concatenate, Array1, Array2, Array3, Axis};

use crate::error::{Error, Result};
use crate::model::{Activation, Mlp};

/// Two affine layers with an activation: embedding space `D_C` to model space `D`.
pub type AlignWeights = Mlp;

/// Map one anchor vector into model space.
pub fn align(anchor: &Array1<f64>, weights: &AlignWeights, act: Activation) -> Result<Array1<f64>> {
    if anchor.len() != weights.fc1.weight.nrows() {
        return Err(Error::Shape(format!(
            "anchor has length {}, alignment expects {}",
            anchor.len(),
            weights.fc1.weight.nrows()
        )));
    }
    let hidden = weights.fc1.forward_vec(anchor).mapv(|v| act.apply(v));
    Ok(weights.fc2.forward_vec(&hidden))
}

/// Append the aligned variable anchor as an extra token on every component row.
///
/// `tokens` is `(rows, N, D)`; the result is `(rows, N + 1, D)`.
pub fn inject_variable_anchor(tokens: &Array3<f64>, anchor: &Array1<f64>) -> Result<Array3<f64>> {
    let (rows, _, d) = tokens.dim();
    if anchor.len() != d {
        return Err(Error::Shape(format!(
            "anchor has length {}, tokens have width {d}",
            anchor.len()
        )));
    }
    let extra = anchor
        .broadcast((rows, 1, d))
        .expect("broadcast to (rows, 1, D)")
        .to_owned();
    Ok(concatenate(Axis(1), &[tokens.view(), extra.view()]).expect("matching shapes"))
}

/// Row-matrix form used inside the network.
pub(crate) fn as_row(v: &Array1<f64>) -> Array2<f64> {
    v.clone().insert_axis(Axis(0))
}
