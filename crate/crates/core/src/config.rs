//! Run configuration: a flat `section.key = value` text format.
//!
//! Precedence, lowest first: built-in defaults, `model.preset` /
//! `split.preset` (applied before any other key regardless of position),
//! the remaining file keys in order, then command-line overrides. The
//! resolved configuration is written next to every run's outputs and parses
//! back to the same value.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::context::{load_anchors, offline_anchors, AnchorSet, HashEmbedder};
use crate::data::{load_csv, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::model::{Activation, ModelConfig};
use crate::synthetic::SineDomain;
use crate::train::{MetricSpace, Precision, TrainConfig, WindowSpec};

/// Environment variable consulted for relative dataset paths.
pub const DATA_DIR_ENV: &str = "CONTEXTST_DATA_DIR";

/// Name of the resolved configuration written beside outputs.
pub const EFFECTIVE_CONFIG: &str = "effective.conf";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    /// CSV path, or `synthetic:a` / `synthetic:b`.
    pub path: Option<String>,
    /// Zero-shot target, same syntax as `path`.
    pub target: Option<String>,
    /// Anchor JSON for `path`; offline anchors are derived when absent.
    pub anchors: Option<String>,
    pub target_anchors: Option<String>,
    /// Domain word used by offline anchor descriptions.
    pub domain: String,
    pub target_domain: String,
    pub stride: usize,
    pub eval_stride: usize,
    pub synthetic_len: usize,
    pub synthetic_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub checkpoint: Option<String>,
    /// Empty means the model horizon only.
    pub horizons: Vec<usize>,
    pub space: MetricSpace,
    pub baseline: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSelection {
    pub variable: Option<String>,
    pub start: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeConfig {
    pub window: WindowSelection,
    /// Length of the analyzed window; 0 means the model lookback.
    pub len: usize,
    pub format: ImageFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeConfig {
    pub window: WindowSelection,
    pub csv: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: DataConfig,
    pub split: SplitSpec,
    pub split_preset: Option<String>,
    pub model: ModelConfig,
    pub model_preset: Option<String>,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub analyze: AnalyzeConfig,
    pub decompose: DecomposeConfig,
    pub out: String,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let selection = WindowSelection {
            variable: None,
            start: 0,
            count: 1,
        };
        RunConfig {
            data: DataConfig {
                path: None,
                target: None,
                anchors: None,
                target_anchors: None,
                domain: "generic".into(),
                target_domain: "generic".into(),
                stride: 1,
                eval_stride: 1,
                synthetic_len: 2000,
                synthetic_seed: 17,
            },
            split: SplitSpec::default(),
            split_preset: None,
            model: ModelConfig::default(),
            model_preset: None,
            train: TrainConfig::default(),
            eval: EvalConfig {
                checkpoint: None,
                horizons: Vec::new(),
                space: MetricSpace::Normalized,
                baseline: true,
            },
            analyze: AnalyzeConfig {
                window: selection.clone(),
                len: 0,
                format: ImageFormat::Pgm,
            },
            decompose: DecomposeConfig {
                window: selection,
                csv: false,
            },
            out: "out".into(),
            threads: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected a boolean, got `{value}`"))),
    }
}

fn optional(value: &str) -> Option<String> {
    (!value.is_empty()).then(|| value.to_string())
}

/// Split a config line into key and value; `None` for blanks and comments.
fn split_line(line: &str, lineno: usize) -> Result<Option<(String, String)>> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("line {lineno}: expected `key = value`")))?;
    Ok(Some((k.trim().to_string(), v.trim().to_string())))
}

impl RunConfig {
    /// Parse config text on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if let Some(kv) = split_line(line, i + 1)? {
                entries.push(kv);
            }
        }
        cfg.apply_all(&entries)?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    /// Apply `key=value` pairs, presets first.
    pub fn apply_all(&mut self, entries: &[(String, String)]) -> Result<()> {
        let is_preset = |k: &str| k == "model.preset" || k == "split.preset";
        for (k, v) in entries.iter().filter(|(k, _)| is_preset(k)) {
            self.set(k, v)?;
        }
        for (k, v) in entries.iter().filter(|(k, _)| !is_preset(k)) {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Parse a `key=value` override as given on the command line.
    pub fn parse_override(text: &str) -> Result<(String, String)> {
        split_line(text, 1)?.ok_or_else(|| Error::Config(format!("empty override `{text}`")))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let m = &mut self.model;
        let t = &mut self.train;
        let d = &mut self.data;
        match key {
            "model.preset" => {
                *m = ModelConfig::preset(value)
                    .ok_or_else(|| Error::Config(format!("unknown model preset `{value}`")))?;
                self.model_preset = Some(value.to_ascii_lowercase());
            }
            "model.K" => m.bands = parse(key, value)?,
            "model.P" => m.patch_len = parse(key, value)?,
            "model.L" => m.lookback = parse(key, value)?,
            "model.T" => m.horizon = parse(key, value)?,
            "model.D" => m.d_model = parse(key, value)?,
            "model.H" => m.heads = parse(key, value)?,
            "model.J" => m.blocks = parse(key, value)?,
            "model.M" => m.experts = parse(key, value)?,
            "model.r" => m.top_r = parse(key, value)?,
            "model.D_C" => m.context_dim = parse(key, value)?,
            "model.kappa" => m.kappa = parse(key, value)?,
            "model.ffn_mult" => m.ffn_mult = parse(key, value)?,
            "model.ln_eps" => m.ln_eps = parse(key, value)?,
            "model.activation" => {
                m.activation = Activation::parse(value)
                    .ok_or_else(|| Error::Config(format!("unknown activation `{value}`")))?
            }
            "model.coordinator" => m.variant.coordinator = parse_bool(key, value)?,
            "model.context" => m.variant.context = parse_bool(key, value)?,
            "model.moe" => m.variant.moe = parse_bool(key, value)?,

            "train.lr" => t.lr = parse(key, value)?,
            "train.epochs" => t.epochs = parse(key, value)?,
            "train.batch_size" => t.batch_size = parse(key, value)?,
            "train.delta" => t.delta = parse(key, value)?,
            "train.alpha" => t.alpha = parse(key, value)?,
            "train.seed" => t.seed = parse(key, value)?,
            "train.patience" => t.patience = parse(key, value)?,
            "train.max_batches" => t.max_batches = parse(key, value)?,
            "train.precision" => t.precision = value.parse()?,
            "train.deterministic" => t.deterministic = parse_bool(key, value)?,

            "data.path" => d.path = optional(value),
            "data.target" => d.target = optional(value),
            "data.anchors" => d.anchors = optional(value),
            "data.target_anchors" => d.target_anchors = optional(value),
            "data.domain" => d.domain = value.to_string(),
            "data.target_domain" => d.target_domain = value.to_string(),
            "data.stride" => d.stride = parse(key, value)?,
            "data.eval_stride" => d.eval_stride = parse(key, value)?,
            "data.synthetic_len" => d.synthetic_len = parse(key, value)?,
            "data.synthetic_seed" => d.synthetic_seed = parse(key, value)?,

            "split.preset" => {
                self.split = SplitSpec::preset(value)
                    .ok_or_else(|| Error::Config(format!("unknown split preset `{value}`")))?;
                self.split_preset = Some(value.to_ascii_lowercase());
            }
            "split.mode" => {
                self.split = match value {
                    "ratio" => SplitSpec::default(),
                    "fixed-borders" => SplitSpec::FixedBorders {
                        train_end: 0,
                        val_end: 0,
                        test_end: 0,
                    },
                    _ => return Err(Error::Config(format!("unknown split mode `{value}`"))),
                }
            }
            "split.train" | "split.val" | "split.test" => {
                let SplitSpec::Ratio { train, val, test } = &mut self.split else {
                    return Err(Error::Config(format!("`{key}` needs split.mode = ratio")));
                };
                let slot = match key {
                    "split.train" => train,
                    "split.val" => val,
                    _ => test,
                };
                *slot = parse(key, value)?;
            }
            "split.train_end" | "split.val_end" | "split.test_end" => {
                let SplitSpec::FixedBorders {
                    train_end,
                    val_end,
                    test_end,
                } = &mut self.split
                else {
                    return Err(Error::Config(format!("`{key}` needs split.mode = fixed-borders")));
                };
                let slot = match key {
                    "split.train_end" => train_end,
                    "split.val_end" => val_end,
                    _ => test_end,
                };
                *slot = parse(key, value)?;
            }

            "eval.checkpoint" => self.eval.checkpoint = optional(value),
            "eval.horizons" => {
                self.eval.horizons = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse(key, s))
                    .collect::<Result<_>>()?
            }
            "eval.space" => {
                self.eval.space = match value {
                    "normalized" => MetricSpace::Normalized,
                    "raw" => MetricSpace::Raw,
                    _ => return Err(Error::Config(format!("`{key}`: expected normalized or raw"))),
                }
            }
            "eval.baseline" => self.eval.baseline = parse_bool(key, value)?,

            "analyze.variable" => self.analyze.window.variable = optional(value),
            "analyze.start" => self.analyze.window.start = parse(key, value)?,
            "analyze.count" => self.analyze.window.count = parse(key, value)?,
            "analyze.len" => self.analyze.len = parse(key, value)?,
            "analyze.format" => {
                self.analyze.format = match value {
                    "pgm" => ImageFormat::Pgm,
                    "csv" => ImageFormat::Csv,
                    _ => return Err(Error::Config(format!("`{key}`: expected pgm or csv"))),
                }
            }
            "decompose.variable" => self.decompose.window.variable = optional(value),
            "decompose.start" => self.decompose.window.start = parse(key, value)?,
            "decompose.count" => self.decompose.window.count = parse(key, value)?,
            "decompose.csv" => self.decompose.csv = parse_bool(key, value)?,

            "run.out" => self.out = value.to_string(),
            "run.threads" => self.threads = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Every key with its resolved value, in a stable order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |o: &Option<String>| o.clone().unwrap_or_default();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let m = &self.model;
        if let Some(p) = &self.model_preset {
            put("model.preset", p.clone());
        }
        put("model.K", m.bands.to_string());
        put("model.P", m.patch_len.to_string());
        put("model.L", m.lookback.to_string());
        put("model.T", m.horizon.to_string());
        put("model.D", m.d_model.to_string());
        put("model.H", m.heads.to_string());
        put("model.J", m.blocks.to_string());
        put("model.M", m.experts.to_string());
        put("model.r", m.top_r.to_string());
        put("model.D_C", m.context_dim.to_string());
        put("model.kappa", m.kappa.to_string());
        put("model.ffn_mult", m.ffn_mult.to_string());
        put("model.ln_eps", format!("{:e}", m.ln_eps));
        put("model.activation", m.activation.name().into());
        put("model.coordinator", m.variant.coordinator.to_string());
        put("model.context", m.variant.context.to_string());
        put("model.moe", m.variant.moe.to_string());

        let t = &self.train;
        put("train.lr", format!("{:e}", t.lr));
        put("train.epochs", t.epochs.to_string());
        put("train.batch_size", t.batch_size.to_string());
        put("train.delta", t.delta.to_string());
        put("train.alpha", t.alpha.to_string());
        put("train.seed", t.seed.to_string());
        put("train.patience", t.patience.to_string());
        put("train.max_batches", t.max_batches.to_string());
        put(
            "train.precision",
            match t.precision {
                Precision::F64 => "f64".into(),
                Precision::F32 => "f32".into(),
            },
        );
        put("train.deterministic", t.deterministic.to_string());

        let d = &self.data;
        put("data.path", opt(&d.path));
        put("data.target", opt(&d.target));
        put("data.anchors", opt(&d.anchors));
        put("data.target_anchors", opt(&d.target_anchors));
        put("data.domain", d.domain.clone());
        put("data.target_domain", d.target_domain.clone());
        put("data.stride", d.stride.to_string());
        put("data.eval_stride", d.eval_stride.to_string());
        put("data.synthetic_len", d.synthetic_len.to_string());
        put("data.synthetic_seed", d.synthetic_seed.to_string());

        if let Some(p) = &self.split_preset {
            put("split.preset", p.clone());
        }
        match self.split {
            SplitSpec::Ratio { train, val, test } => {
                put("split.mode", "ratio".into());
                put("split.train", train.to_string());
                put("split.val", val.to_string());
                put("split.test", test.to_string());
            }
            SplitSpec::FixedBorders {
                train_end,
                val_end,
                test_end,
            } => {
                put("split.mode", "fixed-borders".into());
                put("split.train_end", train_end.to_string());
                put("split.val_end", val_end.to_string());
                put("split.test_end", test_end.to_string());
            }
        }

        let e = &self.eval;
        put("eval.checkpoint", opt(&e.checkpoint));
        put(
            "eval.horizons",
            e.horizons.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(","),
        );
        put(
            "eval.space",
            match e.space {
                MetricSpace::Normalized => "normalized".into(),
                MetricSpace::Raw => "raw".into(),
            },
        );
        put("eval.baseline", e.baseline.to_string());

        let a = &self.analyze;
        put("analyze.variable", opt(&a.window.variable));
        put("analyze.start", a.window.start.to_string());
        put("analyze.count", a.window.count.to_string());
        put("analyze.len", a.len.to_string());
        put(
            "analyze.format",
            match a.format {
                ImageFormat::Pgm => "pgm".into(),
                ImageFormat::Csv => "csv".into(),
            },
        );
        let c = &self.decompose;
        put("decompose.variable", opt(&c.window.variable));
        put("decompose.start", c.window.start.to_string());
        put("decompose.count", c.window.count.to_string());
        put("decompose.csv", c.csv.to_string());

        put("run.out", self.out.clone());
        put("run.threads", self.threads.to_string());
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()?;
        self.split.validate()?;
        if self.data.stride == 0 || self.data.eval_stride == 0 {
            return Err(Error::Config("data strides must be positive".into()));
        }
        Ok(())
    }

    /// Write the resolved configuration into `dir`.
    pub fn write_effective(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let path = dir.as_ref().join(EFFECTIVE_CONFIG);
        std::fs::write(&path, self.to_text()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn window_spec(&self) -> WindowSpec {
        WindowSpec {
            lookback: self.model.lookback,
            horizon: self.model.horizon,
            train_stride: self.data.stride,
            eval_stride: self.data.eval_stride,
        }
    }

    /// The source dataset named by `data.path`.
    pub fn source_dataset(&self) -> Result<Dataset> {
        let spec = self
            .data
            .path
            .as_deref()
            .ok_or_else(|| Error::Config("data.path is not set".into()))?;
        self.open_dataset(spec)
    }

    /// The zero-shot target named by `data.target`.
    pub fn target_dataset(&self) -> Result<Dataset> {
        let spec = self
            .data
            .target
            .as_deref()
            .ok_or_else(|| Error::Config("data.target is not set".into()))?;
        self.open_dataset(spec)
    }

    pub fn open_dataset(&self, spec: &str) -> Result<Dataset> {
        let (len, seed) = (self.data.synthetic_len, self.data.synthetic_seed);
        match spec.strip_prefix("synthetic:") {
            Some("a") => SineDomain::domain_a(len, seed).generate(),
            Some("b") => SineDomain::domain_b(len, seed.wrapping_add(1)).generate(),
            Some(other) => Err(Error::Config(format!("unknown synthetic domain `{other}`"))),
            None => load_csv(resolve_data_path(spec)?),
        }
    }

    pub fn source_anchors(&self, dataset: &Dataset) -> Result<AnchorSet> {
        self.anchors_for(dataset, self.data.anchors.as_deref(), &self.data.domain)
    }

    pub fn target_anchors(&self, dataset: &Dataset) -> Result<AnchorSet> {
        self.anchors_for(dataset, self.data.target_anchors.as_deref(), &self.data.target_domain)
    }

    fn anchors_for(&self, dataset: &Dataset, path: Option<&str>, domain: &str) -> Result<AnchorSet> {
        let set = match path {
            Some(p) => load_anchors(resolve_data_path(p)?, dataset)?.1,
            None => offline_anchors(dataset, domain, &HashEmbedder::new(self.model.context_dim))?.bind(dataset)?,
        };
        if set.dim() != self.model.context_dim {
            return Err(Error::Anchors(format!(
                "anchors have dimension {}, model.D_C is {}",
                set.dim(),
                self.model.context_dim
            )));
        }
        Ok(set)
    }
}

/// Use `path` as given when it exists, otherwise look under `$CONTEXTST_DATA_DIR`.
pub fn resolve_data_path(path: &str) -> Result<PathBuf> {
    let direct = PathBuf::from(path);
    if direct.exists() {
        return Ok(direct);
    }
    if direct.is_relative() {
        if let Some(root) = std::env::var_os(DATA_DIR_ENV) {
            let candidate = Path::new(&root).join(&direct);
            if candidate.exists() {
                return Ok(candidate);
            }
        }
    }
    Err(Error::Io {
        path: direct,
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
    })
}
