//! Forward and backward passes of the dense building blocks.
//!
//! Every `forward` returns a cache holding what its `backward` needs.
//! `backward` accumulates parameter gradients into a same-shaped struct and
//! returns the gradient with respect to the input.

use ndarray::{Array1, Array2, Axis, Zip};

use super::activation::Activation;
use super::params::{LayerNormParams, Linear, Mlp};

impl Linear {
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.weight) + &self.bias
    }

    pub fn forward_vec(&self, x: &Array1<f64>) -> Array1<f64> {
        x.dot(&self.weight) + &self.bias
    }

    pub fn backward(&self, x: &Array2<f64>, dy: &Array2<f64>, grad: &mut Linear) -> Array2<f64> {
        grad.weight += &x.t().dot(dy);
        grad.bias += &dy.sum_axis(Axis(0));
        dy.dot(&self.weight.t())
    }
}

pub struct MlpCache {
    input: Array2<f64>,
    pre: Array2<f64>,
    hidden: Array2<f64>,
}

impl Mlp {
    pub fn forward(&self, x: &Array2<f64>, act: Activation) -> (Array2<f64>, MlpCache) {
        let pre = self.fc1.forward(x);
        let hidden = pre.mapv(|v| act.apply(v));
        let out = self.fc2.forward(&hidden);
        (
            out,
            MlpCache {
                input: x.clone(),
                pre,
                hidden,
            },
        )
    }

    pub fn backward(&self, cache: &MlpCache, dy: &Array2<f64>, act: Activation, grad: &mut Mlp) -> Array2<f64> {
        let mut dh = self.fc2.backward(&cache.hidden, dy, &mut grad.fc2);
        Zip::from(&mut dh)
            .and(&cache.pre)
            .for_each(|g, &u| *g *= act.derivative(u));
        self.fc1.backward(&cache.input, &dh, &mut grad.fc1)
    }
}

pub struct LayerNormCache {
    normalized: Array2<f64>,
    inv_std: Array1<f64>,
}

impl LayerNormParams {
    /// Normalize each row to zero mean and unit variance, then apply gain and bias.
    pub fn forward(&self, x: &Array2<f64>, eps: f64) -> (Array2<f64>, LayerNormCache) {
        let d = x.ncols() as f64;
        let mut normalized = x.clone();
        let mut inv_std = Array1::zeros(x.nrows());
        for (mut row, s) in normalized.rows_mut().into_iter().zip(inv_std.iter_mut()) {
            let mean = row.sum() / d;
            row.mapv_inplace(|v| v - mean);
            let var = row.iter().map(|v| v * v).sum::<f64>() / d;
            *s = 1.0 / (var + eps).sqrt();
            let k = *s;
            row.mapv_inplace(|v| v * k);
        }
        let out = &normalized * &self.gain + &self.bias;
        (out, LayerNormCache { normalized, inv_std })
    }

    pub fn backward(&self, cache: &LayerNormCache, dy: &Array2<f64>, grad: &mut LayerNormParams) -> Array2<f64> {
        grad.gain += &(dy * &cache.normalized).sum_axis(Axis(0));
        grad.bias += &dy.sum_axis(Axis(0));
        let d = dy.ncols() as f64;
        let dxhat = dy * &self.gain;
        let mut dx = Array2::zeros(dy.raw_dim());
        for (((mut out, g), xh), &s) in dx
            .rows_mut()
            .into_iter()
            .zip(dxhat.rows())
            .zip(cache.normalized.rows())
            .zip(cache.inv_std.iter())
        {
            let mean_g = g.sum() / d;
            let mean_gx = g.dot(&xh) / d;
            Zip::from(&mut out)
                .and(&g)
                .and(&xh)
                .for_each(|o, &gi, &xi| *o = s * (gi - mean_g - xi * mean_gx));
        }
        dx
    }
}

/// Row-wise softmax, in place.
pub fn softmax_rows(x: &mut Array2<f64>) {
    for mut row in x.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}
