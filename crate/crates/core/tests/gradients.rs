mod common;

use common::{gradient_errors, tiny_batch};
use contextst::model::{ModelConfig, Params};
use contextst::train::{BatchObjective, Objective};
use contextst::Result;

fn check(cfg: ModelConfig, alpha: f64, label: &str) {
    let (model, samples, anchors) = tiny_batch(&cfg, 4, 11);
    let objective = BatchObjective {
        model: &model,
        samples: samples.iter().collect(),
        anchors: &anchors,
        delta: 0.5,
        alpha,
    };
    for (name, big, small) in gradient_errors(&objective, &model.params, 1e-5) {
        assert!(big <= 1e-4, "{label}: {name} relative error {big:e}");
        assert!(small <= 1e-2, "{label}: {name} small-entry error {small:e}");
    }
}

#[test]
fn tiny_config_matches_finite_differences() {
    check(ModelConfig::tiny(), 0.01, "tiny");
}

#[test]
fn routed_gates_match_finite_differences() {
    let cfg = ModelConfig {
        experts: 4,
        top_r: 2,
        ..ModelConfig::tiny()
    };
    check(cfg, 0.5, "M=4 r=2");
}

#[test]
fn variants_match_finite_differences() {
    let base = ModelConfig {
        experts: 3,
        top_r: 2,
        bands: 2,
        blocks: 2,
        ..ModelConfig::tiny()
    };
    let mut no_ctx = base.clone();
    no_ctx.variant.context = false;
    let mut dense = base.clone();
    dense.variant.moe = false;
    let mut raw = base.clone();
    raw.variant.coordinator = false;
    let mut gelu = base.clone();
    gelu.activation = contextst::model::Activation::Gelu;
    for (cfg, label) in [(base, "K=2 J=2"), (no_ctx, "no context"), (dense, "dense"), (raw, "raw only"), (gelu, "gelu")] {
        check(cfg, 0.2, label);
    }
}

#[test]
fn unselected_experts_get_no_gradient() {
    // One token routed to one of two experts: the other expert's weights
    // must not move.
    let cfg = ModelConfig::tiny();
    let (model, samples, anchors) = tiny_batch(&cfg, 1, 2);
    let objective = BatchObjective {
        model: &model,
        samples: samples.iter().collect(),
        anchors: &anchors,
        delta: 1.0,
        alpha: 0.0,
    };
    let trace = model
        .forward(&samples[0].grid, &anchors.variables[samples[0].variable], &anchors.global)
        .unwrap()
        .0;
    let mut used = [false; 2];
    for table in trace.routes.iter().flatten() {
        for sel in &table.selected {
            for &e in sel {
                used[e] = true;
            }
        }
    }
    let (_, grad) = objective.loss_and_grad(&model.params).unwrap();
    let names = grad.registry();
    for (e, used) in used.iter().enumerate() {
        let prefix = format!("blocks.0.ffn.routed.experts.{e}.");
        let total: f64 = names
            .iter()
            .zip(grad.slices())
            .filter(|((n, _), _)| n.starts_with(&prefix))
            .map(|(_, s)| s.iter().map(|v| v.abs()).sum::<f64>())
            .sum();
        if *used {
            assert!(total > 0.0, "expert {e} was selected but got no gradient");
        } else {
            assert_eq!(total, 0.0, "expert {e} was never selected");
        }
    }
}

/// The FD harness itself, on a function with a known gradient.
struct Quadratic;

impl Objective for Quadratic {
    fn loss(&self, p: &Params) -> Result<f64> {
        Ok(p.slices().iter().flat_map(|s| s.iter()).enumerate().map(|(i, v)| 0.5 * (i % 5 + 1) as f64 * v * v).sum())
    }

    fn loss_and_grad(&self, p: &Params) -> Result<(f64, Params)> {
        let mut g = p.clone();
        let mut i = 0;
        for s in g.slices_mut() {
            for v in s.iter_mut() {
                *v *= (i % 5 + 1) as f64;
                i += 1;
            }
        }
        Ok((self.loss(p)?, g))
    }
}

#[test]
fn harness_recovers_a_quadratic_gradient() {
    let model = contextst::model::Forecaster::new(ModelConfig::tiny(), 4).unwrap();
    for (name, big, small) in gradient_errors(&Quadratic, &model.params, 1e-5) {
        assert!(big <= 1e-4 && small <= 1e-2, "{name}: {big:e} {small:e}");
    }
}
