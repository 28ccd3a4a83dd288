use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::anchors::ContextAnchors;
use crate::data::Dataset;
use crate::error::Result;

/// Deterministic text embedder for offline runs.
///
/// The text bytes are hashed into a seed for a Gaussian projection, and the
/// resulting vector is scaled to unit length. Equal text always maps to the
/// same vector; different text maps to an unrelated direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        HashEmbedder { dim, seed: 0 }
    }

    pub fn embed(&self, text: &str) -> Vec<f64> {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(text.as_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        let mut rng = ChaCha8Rng::from_seed(seed);
        let mut v: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

/// Short descriptions of a dataset and its variables, for offline anchoring.
pub fn describe(dataset: &Dataset, domain: &str) -> (String, Vec<(String, String)>) {
    let global = format!(
        "The {} dataset comes from the {} domain, sampled every {}, with {} variables.",
        dataset.name,
        domain,
        dataset.frequency,
        dataset.num_variables()
    );
    let vars = dataset
        .variables
        .iter()
        .map(|v| {
            (
                v.name.clone(),
                format!(
                    "The '{}' variable is a {} measurement recorded at {}.",
                    v.name, domain, dataset.frequency
                ),
            )
        })
        .collect();
    (global, vars)
}

/// Build anchors for `dataset` from templated descriptions and the hash embedder.
pub fn offline_anchors(dataset: &Dataset, domain: &str, embedder: &HashEmbedder) -> Result<ContextAnchors> {
    let (global, vars) = describe(dataset, domain);
    let variables: BTreeMap<String, Vec<f64>> = vars
        .iter()
        .map(|(name, text)| (name.clone(), embedder.embed(text)))
        .collect();
    ContextAnchors::new(
        dataset.name.clone(),
        embedder.embed(&global),
        variables,
        format!("offline-hash/seed={}", embedder.seed),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_unit_vectors() {
        let e = HashEmbedder::new(16);
        let a = e.embed("hello");
        assert_eq!(a, e.embed("hello"));
        assert_eq!(a.len(), 16);
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_ne!(a, e.embed("hello!"));
    }
}
