use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ForwardTrace;

/// Huber penalty of a single residual.
#[inline]
pub fn huber(err: f64, delta: f64) -> f64 {
    let a = err.abs();
    if a <= delta {
        0.5 * err * err
    } else {
        delta * a - 0.5 * delta * delta
    }
}

/// Derivative of [`huber`] with respect to the residual.
#[inline]
pub fn huber_grad(err: f64, delta: f64) -> f64 {
    if err.abs() <= delta {
        err
    } else {
        delta * err.signum()
    }
}

/// Mean Huber penalty over the horizon.
pub fn huber_loss(pred: &[f64], truth: &[f64], delta: f64) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "huber loss over {} predictions and {} targets",
            pred.len(),
            truth.len()
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("huber delta must be positive".into()));
    }
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| huber(p - t, delta))
        .sum::<f64>()
        / pred.len() as f64)
}

/// Expert utilisation over a set of routed tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingStats {
    /// Share of selections that went to each expert.
    pub f: Vec<f64>,
    /// Mean gate weight per expert.
    pub p: Vec<f64>,
    pub l_load: f64,
    pub tokens: usize,
}

/// `M · Σ_e F_e · P_e`.
pub fn load_balance_loss(f: &[f64], p: &[f64]) -> f64 {
    f.len() as f64 * f.iter().zip(p).map(|(a, b)| a * b).sum::<f64>()
}

/// Running selection counts and gate mass, reduced into [`RoutingStats`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingCounts {
    pub selections: Vec<f64>,
    pub gate_mass: Vec<f64>,
    pub tokens: usize,
    pub top_r: usize,
}

impl RoutingCounts {
    pub fn new(experts: usize, top_r: usize) -> Self {
        RoutingCounts {
            selections: vec![0.0; experts],
            gate_mass: vec![0.0; experts],
            tokens: 0,
            top_r,
        }
    }

    /// Every token of every component in every block counts once.
    pub fn add_trace(&mut self, trace: &ForwardTrace) {
        for table in trace.routes.iter().flatten() {
            for (row, sel) in table.gates.rows().into_iter().zip(&table.selected) {
                for &e in sel {
                    self.selections[e] += 1.0;
                }
                for (m, g) in self.gate_mass.iter_mut().zip(row) {
                    *m += g;
                }
                self.tokens += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &RoutingCounts) {
        for (a, b) in self.selections.iter_mut().zip(&other.selections) {
            *a += b;
        }
        for (a, b) in self.gate_mass.iter_mut().zip(&other.gate_mass) {
            *a += b;
        }
        self.tokens += other.tokens;
    }

    pub fn stats(&self) -> Option<RoutingStats> {
        if self.tokens == 0 {
            return None;
        }
        let n = self.tokens as f64;
        let f: Vec<f64> = self
            .selections
            .iter()
            .map(|s| s / (self.top_r as f64 * n))
            .collect();
        let p: Vec<f64> = self.gate_mass.iter().map(|g| g / n).collect();
        let l_load = load_balance_loss(&f, &p);
        Some(RoutingStats {
            f,
            p,
            l_load,
            tokens: self.tokens,
        })
    }
}

/// `L_pred + α · L_load`.
pub fn total_loss(pred: &[f64], truth: &[f64], stats: Option<&RoutingStats>, delta: f64, alpha: f64) -> Result<f64> {
    let l_pred = huber_loss(pred, truth, delta)?;
    Ok(l_pred + alpha * stats.map_or(0.0, |s| s.l_load))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn huber_branches() {
        assert_eq!(huber_loss(&[0.5], &[0.0], 1.0).unwrap(), 0.125);
        assert_eq!(huber_loss(&[2.0], &[0.0], 1.0).unwrap(), 1.5);
        assert_eq!(huber(1.0, 1.0), 0.5);
        assert_eq!(1.0 * 1.0 - 0.5 * 1.0, 0.5);
    }

    #[test]
    fn huber_is_smooth_at_the_knee() {
        let h = 1e-7;
        for delta in [0.5, 1.0, 2.0] {
            let left = (huber(delta, delta) - huber(delta - h, delta)) / h;
            let right = (huber(delta + h, delta) - huber(delta, delta)) / h;
            assert!((left - right).abs() < 1e-6);
            assert!((huber(delta - h, delta) - huber(delta + h, delta)).abs() < 1e-6);
        }
    }

    #[test]
    fn uniform_routing_loads_one() {
        let f = vec![0.25; 4];
        assert!((load_balance_loss(&f, &f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_expert_collapse_loads_two() {
        let f = [0.5, 0.5, 0.0, 0.0];
        let p = [1.0, 0.0, 0.0, 0.0];
        assert!((load_balance_loss(&f, &p) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_expert() {
        assert_eq!(load_balance_loss(&[1.0], &[1.0]), 1.0);
    }

    #[test]
    fn total_loss_affine_in_alpha() {
        let stats = RoutingStats {
            f: vec![0.5, 0.5],
            p: vec![0.7, 0.3],
            l_load: load_balance_loss(&[0.5, 0.5], &[0.7, 0.3]),
            tokens: 1,
        };
        let pred = [0.1, 0.9];
        let truth = [0.0, 1.5];
        let l = |a| total_loss(&pred, &truth, Some(&stats), 1.0, a).unwrap();
        assert_eq!(l(0.0), huber_loss(&pred, &truth, 1.0).unwrap());
        assert!(((l(0.2) - l(0.0)) - 2.0 * (l(0.1) - l(0.0))).abs() < 1e-12);
        let uniform = RoutingStats {
            f: vec![0.5, 0.5],
            p: vec![0.5, 0.5],
            l_load: 1.0,
            tokens: 1,
        };
        assert!((total_loss(&truth, &truth, Some(&uniform), 1.0, 0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn load_at_least_one_when_f_equals_p(raw in prop::collection::vec(0.01f64..1.0, 1..10)) {
            let sum: f64 = raw.iter().sum();
            let q: Vec<f64> = raw.iter().map(|v| v / sum).collect();
            prop_assert!(load_balance_loss(&q, &q) >= 1.0 - 1e-12);
        }

        #[test]
        fn huber_monotone_in_magnitude(a in 0f64..5.0, b in 0f64..5.0, delta in 0.1f64..3.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(huber(lo, delta) <= huber(hi, delta));
            prop_assert!(huber(-lo, delta) <= huber(-hi, delta));
            prop_assert_eq!(huber(0.0, delta), 0.0);
        }
    }
}
