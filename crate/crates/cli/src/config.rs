//! Run configuration: JSON file values, then command-line flags, on top of
//! per-architecture defaults.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "model": { "architecture": "arnn", "mode": "aesc", "hidden_size": 100, "window": 1 },
//!   "training": { "learning_rate": 0.01, "decay": 0.9, "batch_size": 16 },
//!   "embeddings": { "path": "vectors.txt", "format": "word2vec-text" },
//!   "feature_table": "features.json",
//!   "validation_fraction": 0.1,
//!   "crossval": { "k": 5, "jobs": 4 }
//! }
//! ```
//!
//! `model` takes the fields of [`ModelConfig`], `training` those of
//! [`TrainConfig`]. Every key is optional.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use aspectag::corpus::{EmbeddingFormat, FeatureTable, Mode, FEATURE_COUNT, PRED_IOB_WIDTH};
use aspectag::models::{Architecture, ModelConfig};
use aspectag::training::TrainConfig;
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::usage;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub model: Map<String, Value>,
    #[serde(default)]
    pub training: Map<String, Value>,
    pub embeddings: Option<EmbeddingSource>,
    pub feature_table: Option<PathBuf>,
    pub validation_fraction: Option<f64>,
    pub crossval: Option<CrossvalFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossvalFile {
    pub k: Option<usize>,
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSource {
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: EmbeddingFormat,
}

fn default_format() -> EmbeddingFormat {
    EmbeddingFormat::Word2vecText
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModelFlags {
    /// arnn | rnn | jrnn | lstm | birnn | bilstm
    #[arg(long)]
    pub arch: Option<String>,
    /// ae | aesc
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Context-window radius d (2d + 1 tokens).
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub bidirectional: bool,
    /// Size of randomly initialized embeddings (ignored with --embeddings).
    #[arg(long)]
    pub embedding_dim: Option<usize>,
    #[arg(long)]
    pub dropout_keep: Option<f64>,
    /// Append the 14 linguistic features.
    #[arg(long)]
    pub features: bool,
    /// Append the linguistic features plus the 3-bit source-model tag.
    #[arg(long)]
    pub pred_features: bool,
    #[arg(long)]
    pub attention_size: Option<usize>,
    #[arg(long)]
    pub append_last_state: bool,
    #[arg(long)]
    pub freeze_embeddings: bool,
    /// Pre-trained vectors (text format).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// word2vec-text | glove-text
    #[arg(long)]
    pub embedding_format: Option<String>,
    /// JSON feature table replacing the default POS classes and chunk types.
    #[arg(long)]
    pub feature_table: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct TrainFlags {
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Validate every N steps instead of once per epoch.
    #[arg(long)]
    pub validate_every: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long, conflicts_with = "no_clip")]
    pub clip_norm: Option<f64>,
    #[arg(long)]
    pub no_clip: bool,
    #[arg(long)]
    pub no_shuffle: bool,
    /// Stop once validation F1 reaches this value.
    #[arg(long)]
    pub target_f1: Option<f64>,
    /// Share of the training corpus held out for validation when no dev set is given.
    #[arg(long)]
    pub val_fraction: Option<f64>,
}

/// Recursively overlays `overlay` onto `base`.
pub fn merge(base: &mut Value, overlay: &Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o.clone(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Resolved {
    pub seed: u64,
    pub model: ModelConfig,
    pub training: TrainConfig,
    pub embeddings: Option<EmbeddingSource>,
    pub feature_table: Option<PathBuf>,
    pub validation_fraction: f64,
}

impl Resolved {
    pub fn new(file: &FileConfig, seed: Option<u64>, m: &ModelFlags, t: &TrainFlags) -> Result<Self> {
        let seed = seed.or(file.seed).unwrap_or(0);
        let pick = |flag: &Option<String>, key: &str, default: &str| -> String {
            flag.clone()
                .or_else(|| file.model.get(key).and_then(Value::as_str).map(str::to_string))
                .unwrap_or_else(|| default.to_string())
        };
        let arch: Architecture = pick(&m.arch, "architecture", "arnn").parse().map_err(|e| usage(format!("{e}")))?;
        let mode: Mode = pick(&m.mode, "mode", "aesc")
            .parse()
            .map_err(|_| usage("mode must be ae or aesc"))?;

        let mut model = serde_json::to_value(ModelConfig::new(arch, mode))?;
        merge(&mut model, &Value::Object(file.model.clone()));
        let mut flags = Map::new();
        flags.insert("architecture".into(), json!(arch));
        flags.insert("mode".into(), json!(mode));
        let mut set = |k: &str, v: Value| {
            flags.insert(k.to_string(), v);
        };
        if let Some(h) = m.hidden {
            set("hidden_size", json!(h));
        }
        if let Some(w) = m.window {
            set("window", json!(w));
        }
        if m.bidirectional {
            set("bidirectional", json!(true));
        }
        if let Some(d) = m.embedding_dim {
            set("embedding_dim", json!(d));
        }
        if let Some(k) = m.dropout_keep {
            set("dropout_keep", json!(k));
        }
        if m.features {
            set("use_features", json!(true));
        }
        if m.pred_features {
            set("use_features", json!(true));
            set("feature_dim", json!(FEATURE_COUNT + PRED_IOB_WIDTH));
        }
        if let Some(a) = m.attention_size {
            set("attention_size", json!(a));
        }
        if m.append_last_state {
            set("append_last_state", json!(true));
        }
        if m.freeze_embeddings {
            set("freeze_embeddings", json!(true));
        }
        merge(&mut model, &Value::Object(flags));
        let model: ModelConfig = serde_json::from_value(model).map_err(|e| usage(format!("model settings: {e}")))?;
        model.validate().map_err(|e| usage(e.to_string()))?;

        let mut training = serde_json::to_value(TrainConfig::for_architecture(arch))?;
        merge(&mut training, &Value::Object(file.training.clone()));
        let mut flags = Map::new();
        let mut set = |k: &str, v: Value| {
            flags.insert(k.to_string(), v);
        };
        if let Some(v) = t.lr {
            set("learning_rate", json!(v));
        }
        if let Some(v) = t.decay {
            set("decay", json!(v));
        }
        if let Some(v) = t.batch_size {
            set("batch_size", json!(v));
        }
        if let Some(v) = t.epochs {
            set("max_epochs", json!(v));
        }
        if let Some(v) = t.patience {
            set("patience_steps", json!(v));
        }
        if let Some(v) = t.validate_every {
            set("validate_every", json!(v));
        }
        if let Some(v) = t.max_len {
            set("max_len", json!(v));
        }
        if let Some(v) = t.clip_norm {
            set("clip_norm", json!(v));
        }
        if t.no_clip {
            set("clip_norm", Value::Null);
        }
        if t.no_shuffle {
            set("shuffle", json!(false));
        }
        if let Some(v) = t.target_f1 {
            set("target_f1", json!(v));
        }
        set("seed", json!(seed));
        merge(&mut training, &Value::Object(flags));
        let training: TrainConfig =
            serde_json::from_value(training).map_err(|e| usage(format!("training settings: {e}")))?;
        training.validate().map_err(|e| usage(e.to_string()))?;

        let embeddings = match &m.embeddings {
            Some(path) => Some(EmbeddingSource {
                path: path.clone(),
                format: match &m.embedding_format {
                    Some(f) => f.parse().map_err(|e| usage(format!("{e}")))?,
                    None => file.embeddings.as_ref().map_or(default_format(), |e| e.format),
                },
            }),
            None => file.embeddings.clone(),
        };
        let validation_fraction = t.val_fraction.or(file.validation_fraction).unwrap_or(0.1);
        if !(0.0..1.0).contains(&validation_fraction) {
            return Err(usage(format!("validation fraction must be in [0, 1), got {validation_fraction}")));
        }
        Ok(Resolved {
            seed,
            model,
            training,
            embeddings,
            feature_table: m.feature_table.clone().or_else(|| file.feature_table.clone()),
            validation_fraction,
        })
    }

    pub fn feature_table(&self) -> Result<FeatureTable> {
        match &self.feature_table {
            None => Ok(FeatureTable::default()),
            Some(p) => {
                let bytes = std::fs::read(p).with_context(|| format!("reading feature table {}", p.display()))?;
                FeatureTable::from_json(&bytes).with_context(|| format!("feature table {}", p.display()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = serde_json::from_str(
            r#"{"seed": 3, "model": {"architecture": "lstm", "hidden_size": 20}, "training": {"decay": 0.5}}"#,
        )
        .unwrap();
        let m = ModelFlags {
            hidden: Some(7),
            ..Default::default()
        };
        let r = Resolved::new(&file, None, &m, &TrainFlags::default()).unwrap();
        assert_eq!(r.model.architecture, Architecture::Lstm);
        assert_eq!(r.model.hidden_size, 7);
        assert_eq!(r.model.window, 1);
        assert_eq!((r.training.decay, r.training.seed), (0.5, 3));
    }

    #[test]
    fn architecture_defaults() {
        let r = Resolved::new(&FileConfig::default(), Some(1), &ModelFlags::default(), &TrainFlags::default()).unwrap();
        assert_eq!(r.training.batch_size, 16);
        assert!(r.model.bidirectional);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"sead": 1}"#).is_err());
    }
}
