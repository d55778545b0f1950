//! The shared TOML configuration file.
//!
//! ```toml
//! [segmentation]
//! boundaries = ["...", ".", "?", "!"]
//! emoticons = [":)", ":("]
//!
//! [index]
//! dir = "index"          # holds qr.index.json and improv.index.json
//!
//! [models]
//! dir = "models"         # holds tm.json, lm.json and matcher.json
//!
//! [ranker]
//! path = "ranker.json"
//! threshold = 0.5        # optional; overrides the trained threshold
//!
//! [trigger]
//! base_prob = 0.5
//!
//! [engine]
//! top_n = 20
//!
//! [server]
//! bind = "127.0.0.1:8080"
//! ```
//!
//! Relative paths resolve against the directory holding the config file.
//! Every section and key is optional.

use std::fs;
use std::path::{Path, PathBuf};

use improv_core::engine::{Engine, EngineConfig};
use improv_core::text::TextConfig;
use improv_core::trigger::TriggerConfig;
use serde::Deserialize;

use crate::error::{ImprovError, Result};
use crate::store;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexSection {
    pub dir: PathBuf,
}

impl Default for IndexSection {
    fn default() -> Self {
        Self { dir: "index".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsSection {
    pub dir: PathBuf,
}

impl Default for ModelsSection {
    fn default() -> Self {
        Self { dir: "models".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankerSection {
    pub path: PathBuf,
    pub threshold: Option<f64>,
}

impl Default for RankerSection {
    fn default() -> Self {
        Self { path: "ranker.json".into(), threshold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub bind: String,
    /// Directory served under `/` when set.
    pub static_dir: Option<PathBuf>,
    /// Session turns are written here as JSONL on shutdown when set.
    pub transcript_path: Option<PathBuf>,
}

impl Default for ServerSection {
    fn default() -> Self {
        Self { bind: "127.0.0.1:8080".into(), static_dir: None, transcript_path: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub segmentation: TextConfig,
    pub index: IndexSection,
    pub models: ModelsSection,
    pub ranker: RankerSection,
    pub trigger: TriggerConfig,
    pub engine: EngineConfig,
    pub server: ServerSection,
}

impl Config {
    pub fn parse(source: &str, path: &Path) -> Result<Self> {
        let mut config: Config =
            toml::from_str(source).map_err(|e| ImprovError::Config { path: path.into(), msg: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        config.validate(path)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let source = fs::read_to_string(path).map_err(|e| ImprovError::io(path, e))?;
        Self::parse(&source, path)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.index.dir);
        join(&mut self.models.dir);
        join(&mut self.ranker.path);
        self.server.static_dir.as_mut().map(join);
        self.server.transcript_path.as_mut().map(join);
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let err = |msg: String| ImprovError::Config { path: path.into(), msg };
        self.trigger.validate().map_err(|e| err(format!("[trigger] {e}")))?;
        self.engine.validate().map_err(|e| err(format!("[engine] {e}")))?;
        if let Some(t) = self.ranker.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(err(format!("[ranker] threshold {t} is outside [0, 1]")));
            }
        }
        if self.segmentation.boundaries.iter().any(String::is_empty) {
            return Err(err("[segmentation] boundaries must be non-empty strings".into()));
        }
        Ok(())
    }

    pub fn qr_index_path(&self) -> PathBuf {
        self.index.dir.join(store::QR_INDEX_FILE)
    }

    pub fn improv_index_path(&self) -> PathBuf {
        self.index.dir.join(store::IMPROV_INDEX_FILE)
    }

    /// Loads every artifact named by the config. Errors name the offending file.
    pub fn load_engine(&self) -> Result<Engine> {
        let qr_index = store::load(&self.qr_index_path())?;
        let improv_index = store::load(&self.improv_index_path())?;
        let models = store::load_feature_models(&self.models.dir, self.segmentation.clone())?;
        let mut ranker: improv_core::ranker::RankerModel = store::load(&self.ranker.path)?;
        if let Some(t) = self.ranker.threshold {
            ranker.threshold = t;
        }
        let engine = Engine {
            qr_index,
            improv_index,
            models,
            ranker,
            config: self.engine.clone(),
            trigger: self.trigger.clone(),
            text: self.segmentation.clone(),
        };
        engine.validate()?;
        Ok(engine)
    }
}

/// Segmentation settings from an optional config file.
pub fn text_config(path: Option<&Path>) -> Result<TextConfig> {
    match path {
        Some(p) => Ok(Config::load(p)?.segmentation),
        None => Ok(TextConfig::default()),
    }
}
