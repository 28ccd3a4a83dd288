use serde::{Deserialize, Serialize};

use super::activation::Activation;
use crate::coordinator::CoordinatorConfig;
use crate::error::{Error, Result};

/// Which parts of the architecture are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    /// Frequency-band rows next to the raw window. Off keeps only the raw row.
    pub coordinator: bool,
    /// Context anchors. Off zeroes the anchors and scores experts without them.
    pub context: bool,
    /// Routed experts. Off leaves a single dense feed-forward network.
    pub moe: bool,
}

impl Default for Variant {
    fn default() -> Self {
        Variant {
            coordinator: true,
            context: true,
            moe: true,
        }
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Number of frequency bands `K`.
    #[serde(rename = "K")]
    pub bands: usize,
    #[serde(rename = "P")]
    pub patch_len: usize,
    #[serde(rename = "L")]
    pub lookback: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "D")]
    pub d_model: usize,
    #[serde(rename = "H")]
    pub heads: usize,
    #[serde(rename = "J")]
    pub blocks: usize,
    #[serde(rename = "M")]
    pub experts: usize,
    #[serde(rename = "r")]
    pub top_r: usize,
    #[serde(rename = "D_C")]
    pub context_dim: usize,
    pub kappa: usize,
    pub ffn_mult: usize,
    pub activation: Activation,
    pub ln_eps: f64,
    pub variant: Variant,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            bands: 1,
            patch_len: 24,
            lookback: 96,
            horizon: 96,
            d_model: 256,
            heads: 2,
            blocks: 1,
            experts: 4,
            top_r: 2,
            context_dim: 384,
            kappa: 25,
            ffn_mult: 4,
            activation: Activation::Silu,
            ln_eps: 1e-9,
            variant: Variant::default(),
        }
    }
}

/// `(K, P, D, H, J, M, r)` rows for the benchmark datasets.
const PRESETS: &[(&str, [usize; 7])] = &[
    ("etth1", [1, 24, 256, 2, 1, 4, 2]),
    ("etth2", [2, 24, 256, 2, 1, 4, 2]),
    ("ettm1", [2, 24, 256, 4, 2, 4, 2]),
    ("ettm2", [2, 24, 256, 4, 2, 4, 2]),
    ("electricity", [3, 24, 512, 8, 4, 4, 2]),
    ("weather", [3, 24, 512, 8, 4, 4, 2]),
    ("traffic", [4, 24, 512, 8, 4, 4, 2]),
];

impl ModelConfig {
    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    /// Per-dataset configuration with a 96-step lookback and horizon.
    pub fn preset(name: &str) -> Option<ModelConfig> {
        let key = name.to_ascii_lowercase();
        PRESETS.iter().find(|(n, _)| *n == key).map(|(_, row)| {
            let [bands, patch_len, d_model, heads, blocks, experts, top_r] = *row;
            ModelConfig {
                bands,
                patch_len,
                d_model,
                heads,
                blocks,
                experts,
                top_r,
                ..ModelConfig::default()
            }
        })
    }

    /// The smallest configuration used for gradient checks:
    /// `K=1, N=2, D=8, H=2, J=1, M=2, r=1`.
    pub fn tiny() -> ModelConfig {
        ModelConfig {
            bands: 1,
            patch_len: 12,
            lookback: 24,
            horizon: 6,
            d_model: 8,
            heads: 2,
            blocks: 1,
            experts: 2,
            top_r: 1,
            context_dim: 6,
            kappa: 3,
            ..ModelConfig::default()
        }
    }

    pub fn num_patches(&self) -> usize {
        self.lookback.div_ceil(self.patch_len)
    }

    /// Patch tokens plus the variable context token.
    pub fn num_tokens(&self) -> usize {
        self.num_patches() + 1
    }

    /// Component rows fed through the blocks (raw window + bands).
    pub fn num_rows(&self) -> usize {
        if self.variant.coordinator {
            self.bands + 1
        } else {
            1
        }
    }

    pub fn ffn_dim(&self) -> usize {
        self.ffn_mult * self.d_model
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.heads
    }

    pub fn coordinator(&self) -> CoordinatorConfig {
        CoordinatorConfig {
            bands: if self.variant.coordinator { self.bands } else { 0 },
            kappa: self.kappa,
            patch_len: self.patch_len,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.heads == 0 || self.d_model % self.heads != 0 {
            return fail(format!("D={} must be divisible by H={}", self.d_model, self.heads));
        }
        if self.experts == 0 || self.top_r == 0 || self.top_r > self.experts {
            return fail(format!("need 1 <= r={} <= M={}", self.top_r, self.experts));
        }
        if self.bands == 0 {
            return fail("K must be at least 1".into());
        }
        if self.patch_len == 0 || self.lookback == 0 || self.horizon == 0 {
            return fail("P, L and T must be positive".into());
        }
        if self.lookback % 2 != 0 || self.lookback < 4 {
            return fail(format!("lookback L={} must be even and at least 4", self.lookback));
        }
        if self.bands > self.lookback / 2 {
            return fail(format!("K={} exceeds L/2={}", self.bands, self.lookback / 2));
        }
        if 2 * self.kappa + 1 > self.lookback {
            return fail(format!("kappa={} too large for L={}", self.kappa, self.lookback));
        }
        if self.context_dim == 0 || self.ffn_mult == 0 || self.blocks == 0 {
            return fail("D_C, ffn_mult and J must be positive".into());
        }
        if !(self.ln_eps > 0.0) {
            return fail("ln_eps must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn etth1_preset() {
        let c = ModelConfig::preset("ETTh1").unwrap();
        assert_eq!(
            (c.bands, c.patch_len, c.d_model, c.heads, c.blocks, c.experts, c.top_r),
            (1, 24, 256, 2, 1, 4, 2)
        );
        assert_eq!(c.num_patches(), 4);
        c.validate().unwrap();
    }

    #[test]
    fn every_preset_is_valid() {
        for name in ModelConfig::preset_names() {
            ModelConfig::preset(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn tiny_has_two_patches() {
        let c = ModelConfig::tiny();
        assert_eq!(c.num_patches(), 2);
        c.validate().unwrap();
    }

    #[test]
    fn invalid_heads() {
        let c = ModelConfig {
            heads: 3,
            ..ModelConfig::tiny()
        };
        assert!(c.validate().is_err());
    }
}
