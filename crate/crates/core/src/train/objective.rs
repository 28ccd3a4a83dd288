use ndarray::Array1;
use rayon::prelude::*;

use super::loss::{huber_grad, huber_loss, RoutingCounts, RoutingStats};
use super::task::Sample;
use crate::context::AnchorSet;
use crate::error::{Error, Result};
use crate::model::{ForwardTrace, Forecaster, Params, Tape};

/// Windows handled by one rayon task during backward. Fixed so the
/// floating-point reduction order does not depend on the thread count.
const CHUNK: usize = 4;

/// A differentiable scalar function of the parameters.
pub trait Objective {
    fn loss(&self, params: &Params) -> Result<f64>;
    fn loss_and_grad(&self, params: &Params) -> Result<(f64, Params)>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchLoss {
    pub total: f64,
    pub prediction: f64,
    pub routing: Option<RoutingStats>,
}

/// Mean Huber loss over a batch plus `alpha` times the batch load-balance loss.
pub struct BatchObjective<'a> {
    pub model: &'a Forecaster,
    pub samples: Vec<&'a Sample>,
    pub anchors: &'a AnchorSet,
    pub delta: f64,
    pub alpha: f64,
}

impl<'a> BatchObjective<'a> {
    fn forward_all(&self, model: &Forecaster) -> Result<Vec<(ForwardTrace, Tape)>> {
        self.samples
            .par_iter()
            .map(|s| {
                let var = self
                    .anchors
                    .variables
                    .get(s.variable)
                    .ok_or_else(|| Error::Anchors(format!("no anchor for variable index {}", s.variable)))?;
                model.forward(&s.grid, var, &self.anchors.global)
            })
            .collect()
    }

    fn score(&self, model: &Forecaster, outputs: &[(ForwardTrace, Tape)]) -> Result<BatchLoss> {
        let mut counts = RoutingCounts::new(model.config.experts, model.config.top_r);
        let mut pred_loss = 0.0;
        for ((trace, _), s) in outputs.iter().zip(&self.samples) {
            counts.add_trace(trace);
            pred_loss += huber_loss(trace.prediction.as_slice().expect("contiguous"), &s.target, self.delta)?;
        }
        pred_loss /= self.samples.len() as f64;
        let routing = counts.stats();
        let total = pred_loss + self.alpha * routing.as_ref().map_or(0.0, |r| r.l_load);
        Ok(BatchLoss {
            total,
            prediction: pred_loss,
            routing,
        })
    }

    pub fn evaluate(&self, model: &Forecaster) -> Result<BatchLoss> {
        if self.samples.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let outputs = self.forward_all(model)?;
        self.score(model, &outputs)
    }

    pub fn gradient(&self, model: &Forecaster) -> Result<(BatchLoss, Params)> {
        if self.samples.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let outputs = self.forward_all(model)?;
        let loss = self.score(model, &outputs)?;
        let experts = model.config.experts;
        // With F held fixed, d(alpha·M·Σ F_e P_e)/d(gate weight of e) = alpha·M·F_e / tokens.
        let gate_bias: Vec<f64> = match &loss.routing {
            Some(r) => r
                .f
                .iter()
                .map(|f| self.alpha * experts as f64 * f / r.tokens as f64)
                .collect(),
            None => vec![0.0; experts],
        };
        let scale = 1.0 / (self.samples.len() * model.config.horizon) as f64;
        let partials = outputs
            .par_chunks(CHUNK)
            .zip(self.samples.par_chunks(CHUNK))
            .map(|(outs, samples)| {
                let mut grad = model.params.zeros_like();
                for ((trace, tape), s) in outs.iter().zip(samples) {
                    let d_pred: Array1<f64> = trace
                        .prediction
                        .iter()
                        .zip(&s.target)
                        .map(|(p, t)| huber_grad(p - t, self.delta) * scale)
                        .collect();
                    model.backward(tape, &d_pred, &gate_bias, &mut grad)?;
                }
                Ok(grad)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut grad = model.params.zeros_like();
        for g in &partials {
            grad.add_scaled(g, 1.0);
        }
        Ok((loss, grad))
    }

    fn with_params(&self, params: &Params) -> Forecaster {
        Forecaster {
            config: self.model.config.clone(),
            params: params.clone(),
        }
    }
}

impl Objective for BatchObjective<'_> {
    fn loss(&self, params: &Params) -> Result<f64> {
        Ok(self.evaluate(&self.with_params(params))?.total)
    }

    fn loss_and_grad(&self, params: &Params) -> Result<(f64, Params)> {
        let (loss, grad) = self.gradient(&self.with_params(params))?;
        Ok((loss.total, grad))
    }
}
