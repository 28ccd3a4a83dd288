mod common;

use common::tiny_batch;
use contextst::coordinator::PatchGrid;
use contextst::model::{checkpoint, Forecaster, ModelConfig};
use ndarray::{Array1, Axis};

fn routed() -> ModelConfig {
    ModelConfig {
        bands: 3,
        experts: 4,
        top_r: 2,
        ..ModelConfig::tiny()
    }
}

#[test]
fn component_order_does_not_matter() {
    let cfg = routed();
    let (model, samples, anchors) = tiny_batch(&cfg, 2, 8);
    for s in &samples {
        let var = &anchors.variables[s.variable];
        let base = model.forward(&s.grid, var, &anchors.global).unwrap().0.prediction;
        let order = [0, 3, 1, 2];
        let permuted = PatchGrid {
            patches: s.grid.patches.select(Axis(0), &order),
        };
        let other = model.forward(&permuted, var, &anchors.global).unwrap().0.prediction;
        for (a, b) in base.iter().zip(&other) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn forward_is_bitwise_reproducible() {
    let cfg = routed();
    let (model, samples, anchors) = tiny_batch(&cfg, 3, 1);
    let again = Forecaster::new(cfg, 1).unwrap();
    assert_eq!(model, again);
    for s in &samples {
        let var = &anchors.variables[s.variable];
        let a = model.forward(&s.grid, var, &anchors.global).unwrap().0;
        let b = again.forward(&s.grid, var, &anchors.global).unwrap().0;
        assert_eq!(a, b);
    }
}

#[test]
fn anchors_change_predictions_only_with_context() {
    let mut cfg = routed();
    let (model, samples, anchors) = tiny_batch(&cfg, 1, 3);
    let s = &samples[0];
    let other = Array1::from_elem(cfg.context_dim, 0.3);
    let a = model.forward(&s.grid, &anchors.variables[0], &anchors.global).unwrap().0;
    let b = model.forward(&s.grid, &other, &other).unwrap().0;
    assert_ne!(a.prediction, b.prediction);

    cfg.variant.context = false;
    let blind = Forecaster::from_params(cfg, model.params.clone()).unwrap();
    let a = blind.forward(&s.grid, &anchors.variables[0], &anchors.global).unwrap().0;
    let b = blind.forward(&s.grid, &other, &other).unwrap().0;
    assert_eq!(a.prediction, b.prediction);
}

#[test]
fn routing_tables_cover_every_token() {
    let cfg = routed();
    let (model, samples, anchors) = tiny_batch(&cfg, 1, 4);
    let trace = model
        .forward(&samples[0].grid, &anchors.variables[0], &anchors.global)
        .unwrap()
        .0;
    assert_eq!(trace.routes.len(), cfg.blocks);
    assert_eq!(trace.routes[0].len(), cfg.num_rows());
    for table in &trace.routes[0] {
        assert_eq!(table.gates.dim(), (cfg.num_tokens(), cfg.experts));
        for (row, sel) in table.gates.rows().into_iter().zip(&table.selected) {
            assert_eq!(sel.len(), cfg.top_r);
            let nonzero = row.iter().filter(|g| **g > 0.0).count();
            assert_eq!(nonzero, cfg.top_r);
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn dense_variant_reports_no_routes() {
    let mut cfg = routed();
    cfg.variant.moe = false;
    let (model, samples, anchors) = tiny_batch(&cfg, 1, 4);
    assert!(model.params.registry().iter().all(|(n, _)| !n.contains("routed")));
    let trace = model
        .forward(&samples[0].grid, &anchors.variables[0], &anchors.global)
        .unwrap()
        .0;
    assert!(trace.routes.is_empty());
}

#[test]
fn shape_errors_are_reported() {
    let cfg = ModelConfig::tiny();
    let (model, samples, anchors) = tiny_batch(&cfg, 1, 4);
    let short = Array1::zeros(cfg.context_dim - 1);
    assert!(model.forward(&samples[0].grid, &short, &anchors.global).is_err());
    assert!(model.predict(&[0.0; 10], &anchors.variables[0], &anchors.global).is_err());
}

#[test]
fn non_finite_input_names_a_layer() {
    let cfg = ModelConfig::tiny();
    let (model, samples, anchors) = tiny_batch(&cfg, 1, 4);
    let mut grid = samples[0].grid.clone();
    grid.patches[[0, 0, 0]] = f64::NAN;
    match model.forward(&grid, &anchors.variables[0], &anchors.global) {
        Err(contextst::Error::NonFinite { layer }) => assert_eq!(layer, "embed"),
        other => panic!("expected a non-finite error, got {:?}", other.map(|t| t.0)),
    }
}

#[test]
fn checkpoint_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ctst");
    let model = Forecaster::new(routed(), 9).unwrap();
    checkpoint::save(&path, &model).unwrap();
    let back = checkpoint::load(&path).unwrap();
    assert_eq!(back.config, model.config);
    for (a, b) in model.params.slices().iter().zip(back.params.slices()) {
        for (x, y) in a.iter().zip(b) {
            assert_eq!(*x as f32, *y as f32);
        }
    }
    // A sidecar describing a different architecture is rejected.
    let mut other = routed();
    other.experts = 3;
    std::fs::write(checkpoint::sidecar_path(&path), serde_json::to_string(&other).unwrap()).unwrap();
    assert!(checkpoint::load(&path).is_err());
}
