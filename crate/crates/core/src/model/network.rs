use ndarray::{s, Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::attention::AttentionCache;
use super::config::ModelConfig;
use super::layers::{LayerNormCache, MlpCache};
use super::moe::{FeedForwardCache, RouteTable};
use super::params::Params;
use crate::context::as_row;
use crate::coordinator::{coordinate, PatchGrid};
use crate::error::{Error, Result};

/// Prediction plus the routing decisions taken to produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub prediction: Array1<f64>,
    /// `[block][component]` routing tables; empty without routed experts.
    pub routes: Vec<Vec<RouteTable>>,
}

struct BlockCache {
    attention: AttentionCache,
    norm1: LayerNormCache,
    ffn: FeedForwardCache,
    norm2: LayerNormCache,
}

/// Everything the backward pass needs from one forward pass.
pub struct Tape {
    rows: Vec<Array2<f64>>,
    var_align: MlpCache,
    global_align: Option<MlpCache>,
    blocks: Vec<Vec<BlockCache>>,
    flat: Array1<f64>,
}

/// Context-anchored transformer forecaster.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecaster {
    pub config: ModelConfig,
    pub params: Params,
}

fn ensure_finite(a: &Array2<f64>, layer: impl FnOnce() -> String) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { layer: layer() })
    }
}

impl Forecaster {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = Params::init(&config, &mut rng);
        Ok(Forecaster { config, params })
    }

    pub fn from_params(config: ModelConfig, params: Params) -> Result<Self> {
        config.validate()?;
        let expected = Params::init(&config, &mut ChaCha8Rng::seed_from_u64(0)).registry();
        if params.registry() != expected {
            return Err(Error::Shape("parameter registry does not match the configuration".into()));
        }
        Ok(Forecaster { config, params })
    }

    /// Decompose and patch a raw lookback window.
    pub fn prepare(&self, lookback: &[f64]) -> Result<PatchGrid> {
        if lookback.len() != self.config.lookback {
            return Err(Error::Shape(format!(
                "lookback has length {}, model expects {}",
                lookback.len(),
                self.config.lookback
            )));
        }
        Ok(coordinate(lookback, &self.config.coordinator())?.1)
    }

    pub fn predict(&self, lookback: &[f64], var_anchor: &Array1<f64>, global_anchor: &Array1<f64>) -> Result<ForwardTrace> {
        let grid = self.prepare(lookback)?;
        Ok(self.forward(&grid, var_anchor, global_anchor)?.0)
    }

    /// Run the network on a prepared patch grid.
    pub fn forward(
        &self,
        grid: &PatchGrid,
        var_anchor: &Array1<f64>,
        global_anchor: &Array1<f64>,
    ) -> Result<(ForwardTrace, Tape)> {
        let cfg = &self.config;
        let p = &self.params;
        let (rows, n, plen) = grid.patches.dim();
        if rows != cfg.num_rows() || n != cfg.num_patches() || plen != cfg.patch_len {
            return Err(Error::Shape(format!(
                "patch grid {:?} does not match model ({}, {}, {})",
                grid.patches.dim(),
                cfg.num_rows(),
                cfg.num_patches(),
                cfg.patch_len
            )));
        }
        for (name, a) in [("variable", var_anchor), ("global", global_anchor)] {
            if a.len() != cfg.context_dim {
                return Err(Error::Shape(format!(
                    "{name} anchor has length {}, expected D_C={}",
                    a.len(),
                    cfg.context_dim
                )));
            }
        }
        let act = cfg.activation;
        let d = cfg.d_model;
        let use_context = cfg.variant.context;

        let var_input = if use_context {
            as_row(var_anchor)
        } else {
            Array2::zeros((1, cfg.context_dim))
        };
        let (var_token, var_align) = p.align.forward(&var_input, act);
        ensure_finite(&var_token, || "align".into())?;

        let (gate_scale, global_align) = if use_context && cfg.variant.moe {
            let (a, cache) = p.align.forward(&as_row(global_anchor), act);
            ensure_finite(&a, || "align".into())?;
            (a.row(0).to_owned(), Some(cache))
        } else {
            (Array1::ones(d), None)
        };

        let grid_rows: Vec<Array2<f64>> = grid
            .patches
            .outer_iter()
            .map(|r| r.to_owned())
            .collect();
        let mut hidden: Vec<Array2<f64>> = Vec::with_capacity(rows);
        for x in &grid_rows {
            let e = p.embed.forward(x);
            ensure_finite(&e, || "embed".into())?;
            let mut h = Array2::zeros((n + 1, d));
            h.slice_mut(s![..n, ..]).assign(&e);
            h.row_mut(n).assign(&var_token.row(0));
            hidden.push(h);
        }

        let mut routes = Vec::with_capacity(cfg.blocks);
        let mut caches = Vec::with_capacity(cfg.blocks);
        for (l, block) in p.blocks.iter().enumerate() {
            let mut block_routes = Vec::new();
            let mut block_caches = Vec::with_capacity(rows);
            for h in hidden.iter_mut() {
                let (att, attention) = block.attention.forward(h, cfg.heads);
                ensure_finite(&att, || format!("blocks.{l}.attn"))?;
                let (mixed, norm1) = block.norm1.forward(&(&*h + &att), cfg.ln_eps);
                ensure_finite(&mixed, || format!("blocks.{l}.norm1"))?;
                let (o, ffn, table) = block.ffn.forward(&mixed, &gate_scale, cfg.top_r, act);
                ensure_finite(&o, || format!("blocks.{l}.ffn"))?;
                let (next, norm2) = block.norm2.forward(&(o + &mixed), cfg.ln_eps);
                ensure_finite(&next, || format!("blocks.{l}.norm2"))?;
                *h = next;
                block_routes.extend(table);
                block_caches.push(BlockCache {
                    attention,
                    norm1,
                    ffn,
                    norm2,
                });
            }
            routes.push(block_routes);
            caches.push(block_caches);
        }

        let mut mean = Array2::<f64>::zeros((n + 1, d));
        for h in &hidden {
            mean += h;
        }
        mean /= rows as f64;
        let flat = Array1::from_iter(mean.iter().copied());
        let prediction = p.head.forward_vec(&flat);
        if prediction.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { layer: "head".into() });
        }
        if !cfg.variant.moe {
            routes.clear();
        }
        Ok((
            ForwardTrace { prediction, routes },
            Tape {
                rows: grid_rows,
                var_align,
                global_align,
                blocks: caches,
                flat,
            },
        ))
    }

    /// Accumulate parameter gradients of a loss whose derivative with respect
    /// to the prediction is `d_pred`.
    ///
    /// `gate_bias[e]` is added to the derivative of every selected gate
    /// weight of expert `e` (the load-balancing contribution).
    pub fn backward(&self, tape: &Tape, d_pred: &Array1<f64>, gate_bias: &[f64], grad: &mut Params) -> Result<()> {
        let cfg = &self.config;
        let p = &self.params;
        let act = cfg.activation;
        let d = cfg.d_model;
        let n = cfg.num_patches();
        let rows = tape.rows.len();

        grad.head.weight += &tape
            .flat
            .view()
            .insert_axis(Axis(1))
            .dot(&d_pred.view().insert_axis(Axis(0)));
        grad.head.bias += d_pred;
        let d_flat = p.head.weight.dot(d_pred);
        let d_mean = d_flat
            .into_shape_with_order((n + 1, d))
            .map_err(|e| Error::Shape(e.to_string()))?
            / rows as f64;
        let mut d_hidden: Vec<Array2<f64>> = vec![d_mean; rows];

        let mut d_gate_scale = tape.global_align.as_ref().map(|_| Array1::<f64>::zeros(d));
        for (l, block) in p.blocks.iter().enumerate().rev() {
            let gblock = &mut grad.blocks[l];
            for (k, cache) in tape.blocks[l].iter().enumerate() {
                let dr2 = block.norm2.backward(&cache.norm2, &d_hidden[k], &mut gblock.norm2);
                let mut d_mixed = dr2.clone();
                d_mixed += &block.ffn.backward(
                    &cache.ffn,
                    &dr2,
                    gate_bias,
                    act,
                    &mut gblock.ffn,
                    d_gate_scale.as_mut(),
                );
                let dr1 = block.norm1.backward(&cache.norm1, &d_mixed, &mut gblock.norm1);
                let d_in = &dr1 + &block.attention.backward(&cache.attention, &dr1, &mut gblock.attention);
                if d_in.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        layer: format!("blocks.{l} (backward)"),
                    });
                }
                d_hidden[k] = d_in;
            }
        }

        let mut d_var = Array2::<f64>::zeros((1, d));
        for (x, dh) in tape.rows.iter().zip(&d_hidden) {
            p.embed.backward(x, &dh.slice(s![..n, ..]).to_owned(), &mut grad.embed);
            d_var.row_mut(0).scaled_add(1.0, &dh.row(n));
        }
        p.align.backward(&tape.var_align, &d_var, act, &mut grad.align);
        if let (Some(cache), Some(ds)) = (&tape.global_align, d_gate_scale) {
            p.align.backward(cache, &as_row(&ds), act, &mut grad.align);
        }
        Ok(())
    }
}
