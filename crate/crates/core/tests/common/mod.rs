//! Shared oracles and fixtures for the integration tests.
#![allow(dead_code)]

use contextst::context::{offline_anchors, AnchorSet, HashEmbedder};
use contextst::data::{make_windows, Dataset};
use contextst::model::{Forecaster, ModelConfig, Params};
use contextst::synthetic::SineDomain;
use contextst::train::{prepare_samples, Objective, Sample};
use rustfft::num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// O(n²) DFT of a real signal, bins `0..=n/2`.
pub fn naive_rfft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (t, &v)| {
                let w = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                acc + Complex64::from_polar(v, w)
            })
        })
        .collect()
}

/// Linear scan for energy-balanced band edges, written independently of
/// the library: the k-th edge is the first bin whose cumulative share of
/// energy reaches k/K; edges that would not advance move one bin right
/// (capped at the bin count); a spectrum without energy is cut uniformly.
pub fn scan_boundaries(psd: &[f64], k: usize) -> Vec<usize> {
    let bins = psd.len();
    let total: f64 = psd.iter().sum();
    let mut edges = vec![0];
    for j in 1..k {
        let edge = if total < 1e-12 {
            j * bins / k
        } else {
            let target = j as f64 / k as f64;
            let mut acc = 0.0;
            let mut found = bins;
            for (p, v) in psd.iter().enumerate() {
                acc += v;
                if acc / total >= target {
                    found = p;
                    break;
                }
            }
            found
        };
        let prev = *edges.last().unwrap();
        edges.push(if edge <= prev { (prev + 1).min(bins) } else { edge });
    }
    edges.push(bins);
    edges
}

/// Central finite-difference gradient of `f` over every parameter entry.
pub fn finite_difference(objective: &impl Objective, params: &Params, h: f64) -> Vec<Vec<f64>> {
    let mut work = params.clone();
    let shapes: Vec<usize> = params.slices().iter().map(|s| s.len()).collect();
    let mut out = Vec::with_capacity(shapes.len());
    for (slot, &len) in shapes.iter().enumerate() {
        let mut g = vec![0.0; len];
        for (i, gi) in g.iter_mut().enumerate() {
            let orig = work.slices()[slot][i];
            work.slices_mut()[slot][i] = orig + h;
            let up = objective.loss(&work).unwrap();
            work.slices_mut()[slot][i] = orig - h;
            let down = objective.loss(&work).unwrap();
            work.slices_mut()[slot][i] = orig;
            *gi = (up - down) / (2.0 * h);
        }
        out.push(g);
    }
    out
}

/// Worst relative error per named parameter array.
///
/// Relative error is `|a − f| / max(|a|, |f|, floor)`; the floor keeps
/// entries that are zero up to round-off from dominating.
pub fn gradient_errors(objective: &impl Objective, params: &Params, h: f64) -> Vec<(String, f64, f64)> {
    let (_, grad) = objective.loss_and_grad(params).unwrap();
    let fd = finite_difference(objective, params, h);
    let names = params.registry();
    names
        .into_iter()
        .zip(grad.slices())
        .zip(fd)
        .map(|(((name, _), a), f)| {
            let mut worst_big: f64 = 0.0;
            let mut worst_small: f64 = 0.0;
            for (x, y) in a.iter().zip(&f) {
                let rel = (x - y).abs() / x.abs().max(y.abs()).max(1e-8);
                if x.abs() < 1e-8 {
                    worst_small = worst_small.max(rel);
                } else {
                    worst_big = worst_big.max(rel);
                }
            }
            (name, worst_big, worst_small)
        })
        .collect()
}

pub fn tiny_anchors(ds: &Dataset, dim: usize) -> AnchorSet {
    offline_anchors(ds, "synthetic", &HashEmbedder::new(dim))
        .unwrap()
        .bind(ds)
        .unwrap()
}

/// A handful of domain-A windows shaped for `cfg`.
pub fn tiny_batch(cfg: &ModelConfig, count: usize, seed: u64) -> (Forecaster, Vec<Sample>, AnchorSet) {
    let ds = SineDomain::domain_a(cfg.lookback + cfg.horizon + 8 * count, 5).generate().unwrap();
    let model = Forecaster::new(cfg.clone(), seed).unwrap();
    let windows = make_windows(&ds, cfg.lookback, cfg.horizon, 8).unwrap();
    let picked: Vec<_> = windows.into_iter().step_by(3).take(count).collect();
    let samples = prepare_samples(&model, &picked).unwrap();
    let anchors = tiny_anchors(&ds, cfg.context_dim);
    (model, samples, anchors)
}
