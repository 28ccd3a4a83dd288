use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const ANCHOR_SCHEMA: &str = "contextst-anchors/1";

/// Global and per-variable context embeddings for one dataset.
///
/// Field order matches the canonical on-disk layout; variables are kept
/// sorted by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextAnchors {
    pub schema: String,
    pub dataset: String,
    pub dim: usize,
    pub global: Vec<f64>,
    pub variables: BTreeMap<String, Vec<f64>>,
    pub source: String,
}

/// Anchors resolved against a dataset's variable order.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub global: Array1<f64>,
    pub variables: Vec<Array1<f64>>,
}

impl AnchorSet {
    /// Semantics-free anchors for ablations.
    pub fn zeros(dim: usize, num_variables: usize) -> Self {
        AnchorSet {
            global: Array1::zeros(dim),
            variables: vec![Array1::zeros(dim); num_variables],
        }
    }

    pub fn dim(&self) -> usize {
        self.global.len()
    }
}

impl ContextAnchors {
    pub fn new(
        dataset: impl Into<String>,
        global: Vec<f64>,
        variables: BTreeMap<String, Vec<f64>>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let anchors = ContextAnchors {
            schema: ANCHOR_SCHEMA.to_string(),
            dataset: dataset.into(),
            dim: global.len(),
            global,
            variables,
            source: source.into(),
        };
        anchors.validate()?;
        Ok(anchors)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != ANCHOR_SCHEMA {
            return Err(Error::Anchors(format!(
                "unknown schema `{}`, expected `{ANCHOR_SCHEMA}`",
                self.schema
            )));
        }
        if self.dim == 0 {
            return Err(Error::Anchors("dim must be positive".into()));
        }
        let check = |what: &str, v: &[f64]| -> Result<()> {
            if v.len() != self.dim {
                return Err(Error::Anchors(format!(
                    "dim mismatch: {what} has length {}, expected {}",
                    v.len(),
                    self.dim
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Anchors(format!("{what} contains non-finite values")));
            }
            Ok(())
        };
        check("global", &self.global)?;
        for (name, v) in &self.variables {
            check(&format!("variable `{name}`"), v)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let anchors: ContextAnchors = serde_json::from_str(text)?;
        anchors.validate()?;
        Ok(anchors)
    }

    /// Canonical serialization: fixed key order, variables sorted.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Resolve vectors in the dataset's variable order.
    pub fn bind(&self, dataset: &Dataset) -> Result<AnchorSet> {
        let missing: Vec<&str> = dataset
            .variable_names()
            .into_iter()
            .filter(|n| !self.variables.contains_key(*n))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Anchors(format!(
                "variables absent from anchor file: {}",
                missing.join(", ")
            )));
        }
        Ok(AnchorSet {
            global: Array1::from(self.global.clone()),
            variables: dataset
                .variables
                .iter()
                .map(|v| Array1::from(self.variables[&v.name].clone()))
                .collect(),
        })
    }
}

/// Read an anchor file and bind it to `dataset`.
pub fn load_anchors(path: impl AsRef<Path>, dataset: &Dataset) -> Result<(ContextAnchors, AnchorSet)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let anchors = ContextAnchors::from_json(&text)?;
    if anchors.dataset != dataset.name {
        log::warn!(
            "anchor file names dataset `{}` but is bound to `{}`",
            anchors.dataset,
            dataset.name
        );
    }
    let set = anchors.bind(dataset)?;
    Ok((anchors, set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;

    const ETTH1_VARS: [&str; 7] = ["HUFL", "HULL", "MUFL", "MULL", "LUFL", "LULL", "OT"];

    fn etth1_like() -> Dataset {
        Dataset::from_columns(
            "ETTh1",
            Duration::hours(1),
            ETTH1_VARS.iter().map(|n| (n.to_string(), vec![0.0; 4])).collect(),
        )
        .unwrap()
    }

    fn anchors(dim: usize, vars: &[&str]) -> ContextAnchors {
        let variables = vars
            .iter()
            .enumerate()
            .map(|(i, n)| (n.to_string(), vec![i as f64 * 0.5; dim]))
            .collect();
        ContextAnchors::new("ETTh1", vec![0.25; dim], variables, "test").unwrap()
    }

    #[test]
    fn binds_seven_variables_in_dataset_order() {
        let a = anchors(4, &ETTH1_VARS);
        let set = a.bind(&etth1_like()).unwrap();
        assert_eq!(set.variables.len(), 7);
        assert_eq!(set.variables[6][0], 3.0);
    }

    #[test]
    fn wrong_global_length() {
        let mut a = anchors(4, &ETTH1_VARS);
        a.global.pop();
        let err = ContextAnchors::from_json(&serde_json::to_string(&a).unwrap()).unwrap_err();
        assert!(err.to_string().contains("dim mismatch"));
    }

    #[test]
    fn unknown_schema() {
        let mut a = anchors(4, &ETTH1_VARS);
        a.schema = "contextst-anchors/2".into();
        assert!(ContextAnchors::from_json(&serde_json::to_string(&a).unwrap()).is_err());
    }

    #[test]
    fn zero_vectors_are_accepted() {
        let variables = ETTH1_VARS.iter().map(|n| (n.to_string(), vec![0.0; 3])).collect();
        let a = ContextAnchors::new("ETTh1", vec![0.0; 3], variables, "ablation").unwrap();
        assert!(a.bind(&etth1_like()).is_ok());
    }

    #[test]
    fn missing_variable() {
        let a = anchors(2, &ETTH1_VARS[..6]);
        let err = a.bind(&etth1_like()).unwrap_err();
        assert!(err.to_string().contains("OT"));
    }

    #[test]
    fn canonical_key_order() {
        let a = anchors(1, &["b", "a"]);
        let text = a.to_json().unwrap();
        let keys = ["\"schema\"", "\"dataset\"", "\"dim\"", "\"global\"", "\"variables\"", "\"source\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }
}
