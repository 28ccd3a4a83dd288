use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use super::config::ModelConfig;

/// Uniform access to every learnable array under a dotted path.
pub trait Visit {
    fn visit<'a>(&'a self, path: &str, f: &mut dyn FnMut(&str, &[usize], &'a [f64]));
    fn visit_mut<'a>(&'a mut self, path: &str, f: &mut dyn FnMut(&str, &[usize], &'a mut [f64]));
}

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

macro_rules! impl_visit_array {
    ($ty:ty) => {
        impl Visit for $ty {
            fn visit<'a>(&'a self, path: &str, f: &mut dyn FnMut(&str, &[usize], &'a [f64])) {
                f(path, self.shape(), self.as_slice().expect("standard layout"));
            }
            fn visit_mut<'a>(
                &'a mut self,
                path: &str,
                f: &mut dyn FnMut(&str, &[usize], &'a mut [f64]),
            ) {
                let shape = self.shape().to_vec();
                f(path, &shape, self.as_slice_mut().expect("standard layout"));
            }
        }
    };
}

impl_visit_array!(Array1<f64>);
impl_visit_array!(Array2<f64>);

macro_rules! impl_visit_struct {
    ($ty:ty { $($field:ident => $name:literal),* $(,)? }) => {
        impl Visit for $ty {
            fn visit<'a>(&'a self, path: &str, f: &mut dyn FnMut(&str, &[usize], &'a [f64])) {
                $( self.$field.visit(&join(path, $name), f); )*
            }
            fn visit_mut<'a>(
                &'a mut self,
                path: &str,
                f: &mut dyn FnMut(&str, &[usize], &'a mut [f64]),
            ) {
                $( self.$field.visit_mut(&join(path, $name), f); )*
            }
        }
    };
}

impl<T: Visit> Visit for Vec<T> {
    fn visit<'a>(&'a self, path: &str, f: &mut dyn FnMut(&str, &[usize], &'a [f64])) {
        for (i, item) in self.iter().enumerate() {
            item.visit(&join(path, &i.to_string()), f);
        }
    }
    fn visit_mut<'a>(&'a mut self, path: &str, f: &mut dyn FnMut(&str, &[usize], &'a mut [f64])) {
        for (i, item) in self.iter_mut().enumerate() {
            item.visit_mut(&join(path, &i.to_string()), f);
        }
    }
}

impl<T: Visit> Visit for Option<T> {
    fn visit<'a>(&'a self, path: &str, f: &mut dyn FnMut(&str, &[usize], &'a [f64])) {
        if let Some(inner) = self {
            inner.visit(path, f);
        }
    }
    fn visit_mut<'a>(&'a mut self, path: &str, f: &mut dyn FnMut(&str, &[usize], &'a mut [f64])) {
        if let Some(inner) = self {
            inner.visit_mut(path, f);
        }
    }
}

/// Affine map `y = x·W + b` with `W` stored as `(in, out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Two affine layers with an activation in between.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub fc1: Linear,
    pub fc2: Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormParams {
    pub gain: Array1<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub query: Linear,
    pub key: Linear,
    pub value: Linear,
    pub output: Linear,
}

/// Routed experts and the context-conditioned gate scoring them.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedExperts {
    /// `(D, M)`: logits are `(h ⊙ a)·W`.
    pub gate: Array2<f64>,
    pub experts: Vec<Mlp>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward {
    pub shared: Mlp,
    /// Absent in the dense-FFN ablation.
    pub routed: Option<RoutedExperts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    pub attention: AttentionParams,
    pub norm1: LayerNormParams,
    pub ffn: FeedForward,
    pub norm2: LayerNormParams,
}

/// Every learnable array of the forecaster.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub embed: Linear,
    pub align: Mlp,
    pub blocks: Vec<BlockParams>,
    pub head: Linear,
}

impl_visit_struct!(Linear { weight => "weight", bias => "bias" });
impl_visit_struct!(Mlp { fc1 => "fc1", fc2 => "fc2" });
impl_visit_struct!(LayerNormParams { gain => "gain", bias => "bias" });
impl_visit_struct!(AttentionParams { query => "query", key => "key", value => "value", output => "output" });
impl_visit_struct!(RoutedExperts { gate => "gate", experts => "experts" });
impl_visit_struct!(FeedForward { shared => "shared", routed => "routed" });
impl_visit_struct!(BlockParams { attention => "attn", norm1 => "norm1", ffn => "ffn", norm2 => "norm2" });
impl_visit_struct!(Params { embed => "embed", align => "align", blocks => "blocks", head => "head" });

fn xavier(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> Array2<f64> {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    Array2::from_shape_fn((fan_in, fan_out), |_| dist.sample(rng))
}

impl Linear {
    pub fn init(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> Self {
        Linear {
            weight: xavier(rng, fan_in, fan_out),
            bias: Array1::zeros(fan_out),
        }
    }

    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Linear {
            weight: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }
}

impl Mlp {
    pub fn init(rng: &mut impl Rng, input: usize, hidden: usize, output: usize) -> Self {
        Mlp {
            fc1: Linear::init(rng, input, hidden),
            fc2: Linear::init(rng, hidden, output),
        }
    }
}

impl LayerNormParams {
    pub fn new(dim: usize) -> Self {
        LayerNormParams {
            gain: Array1::ones(dim),
            bias: Array1::zeros(dim),
        }
    }
}

impl Params {
    /// Fresh weights: Xavier-uniform matrices, zero biases, unit norm gains,
    /// and gate weights drawn from `N(0, 0.02²)`.
    pub fn init(cfg: &ModelConfig, rng: &mut impl Rng) -> Self {
        let d = cfg.d_model;
        let ff = cfg.ffn_dim();
        let embed = Linear::init(rng, cfg.patch_len, d);
        let align = Mlp::init(rng, cfg.context_dim, d, d);
        let gate_dist = Normal::new(0.0, 0.02).expect("valid normal");
        let blocks = (0..cfg.blocks)
            .map(|_| BlockParams {
                attention: AttentionParams {
                    query: Linear::init(rng, d, d),
                    key: Linear::init(rng, d, d),
                    value: Linear::init(rng, d, d),
                    output: Linear::init(rng, d, d),
                },
                norm1: LayerNormParams::new(d),
                ffn: FeedForward {
                    routed: cfg.variant.moe.then(|| RoutedExperts {
                        gate: Array2::from_shape_fn((d, cfg.experts), |_| gate_dist.sample(rng)),
                        experts: (0..cfg.experts).map(|_| Mlp::init(rng, d, ff, d)).collect(),
                    }),
                    shared: Mlp::init(rng, d, ff, d),
                },
                norm2: LayerNormParams::new(d),
            })
            .collect();
        let head = Linear::init(rng, cfg.num_tokens() * d, cfg.horizon);
        Params {
            embed,
            align,
            blocks,
            head,
        }
    }

    /// Same registry with every entry zeroed (gradient accumulator).
    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        out.fill(0.0);
        out
    }

    pub fn fill(&mut self, value: f64) {
        self.visit_mut("", &mut |_, _, data| data.fill(value));
    }

    /// `(name, shape)` for every array, in registry order.
    pub fn registry(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        self.visit("", &mut |name, shape, _| out.push((name.to_string(), shape.to_vec())));
        out
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        self.visit("", &mut |_, _, data| out.push(data));
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        self.visit_mut("", &mut |_, _, data| out.push(data));
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    /// `self += scale * other`, entry by entry.
    pub fn add_scaled(&mut self, other: &Params, scale: f64) {
        for (dst, src) in self.slices_mut().into_iter().zip(other.slices()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.visit_mut("", &mut |_, _, data| data.iter_mut().for_each(|v| *v *= factor));
    }

    pub fn all_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }
}
