use serde::{Deserialize, Serialize};

use crate::model::Params;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias correction and no weight decay.
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    step: i32,
    m: Params,
    v: Params,
}

impl Adam {
    pub fn new(config: AdamConfig, params: &Params) -> Self {
        Adam {
            config,
            step: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn steps(&self) -> i32 {
        self.step
    }

    pub fn step(&mut self, params: &mut Params, grads: &Params) {
        self.step += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let c1 = 1.0 - beta1.powi(self.step);
        let c2 = 1.0 - beta2.powi(self.step);
        let slots = params
            .slices_mut()
            .into_iter()
            .zip(grads.slices())
            .zip(self.m.slices_mut())
            .zip(self.v.slices_mut());
        for (((p, g), m), v) in slots {
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Forecaster, ModelConfig};

    #[test]
    fn zero_learning_rate_is_identity() {
        let model = Forecaster::new(ModelConfig::tiny(), 5).unwrap();
        let mut params = model.params.clone();
        let mut grads = params.clone();
        grads.scale(3.0);
        let mut adam = Adam::new(
            AdamConfig {
                lr: 0.0,
                ..AdamConfig::default()
            },
            &params,
        );
        for _ in 0..10 {
            adam.step(&mut params, &grads);
        }
        assert_eq!(params, model.params);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let model = Forecaster::new(ModelConfig::tiny(), 5).unwrap();
        let mut params = model.params.clone();
        let mut grads = params.zeros_like();
        grads.fill(2.0);
        let mut adam = Adam::new(AdamConfig::default(), &params);
        adam.step(&mut params, &grads);
        let before = model.params.slices()[0][0];
        let after = params.slices()[0][0];
        assert!((before - after - 1e-3).abs() < 1e-9);
    }
}
