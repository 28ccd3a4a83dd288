use ndarray::{Array1, Array2, ArrayView1, Axis};

use super::activation::Activation;
use super::layers::MlpCache;
use super::params::FeedForward;

/// Pick the `r` largest logits (lowest index wins ties) and softmax over them.
///
/// Returns the selected expert indices in rank order and a dense weight
/// vector that is exactly zero outside the selection.
pub fn top_r_gate(logits: ArrayView1<f64>, r: usize) -> (Vec<usize>, Array1<f64>) {
    let m = logits.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| logits[b].total_cmp(&logits[a]).then(a.cmp(&b)));
    order.truncate(r.min(m));
    let max = logits[order[0]];
    let mut weights = Array1::zeros(m);
    let mut sum = 0.0;
    for &e in &order {
        let w = (logits[e] - max).exp();
        weights[e] = w;
        sum += w;
    }
    for &e in &order {
        weights[e] /= sum;
    }
    (order, weights)
}

/// Routing decisions for the tokens of one component in one block.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTable {
    /// `(S, M)` gate weights, zero for unselected experts.
    pub gates: Array2<f64>,
    pub selected: Vec<Vec<usize>>,
}

struct ExpertCache {
    expert: usize,
    rows: Vec<usize>,
    mlp: MlpCache,
    output: Array2<f64>,
}

pub struct FeedForwardCache {
    input: Array2<f64>,
    shared: MlpCache,
    routed: Option<RoutedCache>,
}

struct RoutedCache {
    scale: Array1<f64>,
    scaled_input: Array2<f64>,
    table: RouteTable,
    experts: Vec<ExpertCache>,
}

fn gather_rows(x: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    x.select(Axis(0), rows)
}

impl FeedForward {
    /// Shared expert plus gated routed experts, applied per token.
    ///
    /// `gate_scale` multiplies tokens elementwise before scoring: the aligned
    /// global anchor, or ones when routing ignores context.
    pub fn forward(
        &self,
        x: &Array2<f64>,
        gate_scale: &Array1<f64>,
        top_r: usize,
        act: Activation,
    ) -> (Array2<f64>, FeedForwardCache, Option<RouteTable>) {
        let (mut out, shared) = self.shared.forward(x, act);
        let Some(routed) = &self.routed else {
            return (
                out,
                FeedForwardCache {
                    input: x.clone(),
                    shared,
                    routed: None,
                },
                None,
            );
        };
        let scaled_input = x * gate_scale;
        let logits = scaled_input.dot(&routed.gate);
        let tokens = x.nrows();
        let m = routed.experts.len();
        let mut gates = Array2::zeros((tokens, m));
        let mut selected = Vec::with_capacity(tokens);
        for (t, row) in logits.rows().into_iter().enumerate() {
            let (sel, w) = top_r_gate(row, top_r);
            gates.row_mut(t).assign(&w);
            selected.push(sel);
        }
        let mut experts = Vec::with_capacity(m);
        for (e, expert) in routed.experts.iter().enumerate() {
            let rows: Vec<usize> = (0..tokens).filter(|&t| selected[t].contains(&e)).collect();
            if rows.is_empty() {
                continue;
            }
            let (y, mlp) = expert.forward(&gather_rows(x, &rows), act);
            for (i, &t) in rows.iter().enumerate() {
                let g = gates[[t, e]];
                out.row_mut(t).scaled_add(g, &y.row(i));
            }
            experts.push(ExpertCache {
                expert: e,
                rows,
                mlp,
                output: y,
            });
        }
        let table = RouteTable { gates, selected };
        (
            out,
            FeedForwardCache {
                input: x.clone(),
                shared,
                routed: Some(RoutedCache {
                    scale: gate_scale.clone(),
                    scaled_input,
                    table: table.clone(),
                    experts,
                }),
            },
            Some(table),
        )
    }

    /// Backpropagate `dy`. Selections are held fixed; only the softmax weights
    /// of selected experts carry gradient. `gate_bias[e]` is added to the
    /// gradient of every selected weight of expert `e` (load-balancing term).
    pub fn backward(
        &self,
        cache: &FeedForwardCache,
        dy: &Array2<f64>,
        gate_bias: &[f64],
        act: Activation,
        grad: &mut FeedForward,
        d_scale: Option<&mut Array1<f64>>,
    ) -> Array2<f64> {
        let mut dx = self.shared.backward(&cache.shared, dy, act, &mut grad.shared);
        let (Some(routed), Some(rc), Some(rgrad)) = (&self.routed, &cache.routed, grad.routed.as_mut()) else {
            return dx;
        };
        let gates = &rc.table.gates;
        let mut dgates = Array2::<f64>::zeros(gates.raw_dim());
        for ec in &rc.experts {
            let e = ec.expert;
            let mut dye = Array2::zeros(ec.output.raw_dim());
            for (i, &t) in ec.rows.iter().enumerate() {
                let g = gates[[t, e]];
                dye.row_mut(i).assign(&(&dy.row(t) * g));
                dgates[[t, e]] = dy.row(t).dot(&ec.output.row(i)) + gate_bias[e];
            }
            let dxe = routed.experts[e].backward(&ec.mlp, &dye, act, &mut rgrad.experts[e]);
            for (i, &t) in ec.rows.iter().enumerate() {
                dx.row_mut(t).scaled_add(1.0, &dxe.row(i));
            }
        }
        // softmax over the selected logits
        let mut dlogits = Array2::<f64>::zeros(gates.raw_dim());
        for (t, sel) in rc.table.selected.iter().enumerate() {
            let inner: f64 = sel.iter().map(|&e| gates[[t, e]] * dgates[[t, e]]).sum();
            for &e in sel {
                dlogits[[t, e]] = gates[[t, e]] * (dgates[[t, e]] - inner);
            }
        }
        rgrad.gate += &rc.scaled_input.t().dot(&dlogits);
        let dscaled = dlogits.dot(&routed.gate.t());
        dx += &(&dscaled * &rc.scale);
        if let Some(ds) = d_scale {
            *ds += &(&dscaled * &cache.input).sum_axis(Axis(0));
        }
        dx
    }
}
