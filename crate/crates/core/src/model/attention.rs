use ndarray::{s, Array2, Axis, Zip};

use super::layers::softmax_rows;
use super::params::AttentionParams;

/// Cached activations of one multi-head self-attention call.
pub struct AttentionCache {
    input: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    /// Attention weights per head, `(S, S)` each.
    pub probs: Vec<Array2<f64>>,
    mixed: Array2<f64>,
}

impl AttentionParams {
    /// Bidirectional scaled dot-product attention over the rows of `x`.
    pub fn forward(&self, x: &Array2<f64>, heads: usize) -> (Array2<f64>, AttentionCache) {
        let (tokens, d) = x.dim();
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let q = self.query.forward(x);
        let k = self.key.forward(x);
        let v = self.value.forward(x);
        let mut mixed = Array2::zeros((tokens, d));
        let mut probs = Vec::with_capacity(heads);
        for h in 0..heads {
            let cols = s![.., h * dh..(h + 1) * dh];
            let mut scores = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            softmax_rows(&mut scores);
            mixed.slice_mut(cols).assign(&scores.dot(&v.slice(cols)));
            probs.push(scores);
        }
        let out = self.output.forward(&mixed);
        (
            out,
            AttentionCache {
                input: x.clone(),
                q,
                k,
                v,
                probs,
                mixed,
            },
        )
    }

    pub fn backward(&self, cache: &AttentionCache, dy: &Array2<f64>, grad: &mut AttentionParams) -> Array2<f64> {
        let d = dy.ncols();
        let heads = cache.probs.len();
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let dmixed = self.output.backward(&cache.mixed, dy, &mut grad.output);
        let mut dq = Array2::zeros(cache.q.raw_dim());
        let mut dk = Array2::zeros(cache.k.raw_dim());
        let mut dv = Array2::zeros(cache.v.raw_dim());
        for (h, p) in cache.probs.iter().enumerate() {
            let cols = s![.., h * dh..(h + 1) * dh];
            let dz = dmixed.slice(cols);
            let dp = dz.dot(&cache.v.slice(cols).t());
            dv.slice_mut(cols).assign(&p.t().dot(&dz));
            // softmax backward, row by row
            let row_dot = (&dp * p).sum_axis(Axis(1));
            let mut dscores = dp;
            Zip::from(dscores.rows_mut())
                .and(p.rows())
                .and(&row_dot)
                .for_each(|mut ds, pr, &rd| {
                    Zip::from(&mut ds).and(&pr).for_each(|g, &pv| *g = pv * (*g - rd) * scale);
                });
            dq.slice_mut(cols).assign(&dscores.dot(&cache.k.slice(cols)));
            dk.slice_mut(cols).assign(&dscores.t().dot(&cache.q.slice(cols)));
        }
        let mut dx = self.query.backward(&cache.input, &dq, &mut grad.query);
        dx += &self.key.backward(&cache.input, &dk, &mut grad.key);
        dx += &self.value.backward(&cache.input, &dv, &mut grad.value);
        dx
    }
}
