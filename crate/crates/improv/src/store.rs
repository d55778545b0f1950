//! Versioned on-disk containers for indexes and trained models.
//!
//! Every artifact is one JSON document:
//!
//! ```text
//! {"magic":"improv","model_type":"<kind>","version":1,"model":{...}}
//! ```
//!
//! Loading checks the magic string, the kind and the version before the body
//! is accepted, and structural invariants after. Serialization is
//! deterministic, so saving a loaded artifact reproduces the original bytes.

use std::fs;
use std::path::{Path, PathBuf};

use improv_core::engine::{ImprovIndex, QrIndex};
use improv_core::models::{DualEncoder, TranslationTable, TrigramLm};
use improv_core::ranker::{FeatureModels, RankerModel};
use improv_core::text::TextConfig;
use serde::de::{DeserializeOwned, IgnoredAny};
use serde::{Deserialize, Serialize};

use crate::error::{ImprovError, Result};

pub const MAGIC: &str = "improv";
pub const FORMAT_VERSION: u32 = 1;

pub const QR_INDEX_FILE: &str = "qr.index.json";
pub const IMPROV_INDEX_FILE: &str = "improv.index.json";
pub const TM_FILE: &str = "tm.json";
pub const LM_FILE: &str = "lm.json";
pub const MATCHER_FILE: &str = "matcher.json";

/// What a container holds.
pub trait Artifact: Serialize + DeserializeOwned {
    const KIND: &'static str;

    fn check(&self) -> improv_core::Result<()> {
        Ok(())
    }
}

impl Artifact for QrIndex {
    const KIND: &'static str = "qr-index";
    fn check(&self) -> improv_core::Result<()> {
        self.validate()
    }
}

impl Artifact for ImprovIndex {
    const KIND: &'static str = "improv-index";
    fn check(&self) -> improv_core::Result<()> {
        self.validate()
    }
}

impl Artifact for TranslationTable {
    const KIND: &'static str = "ibm1-translation";
    fn check(&self) -> improv_core::Result<()> {
        self.validate()
    }
}

impl Artifact for TrigramLm {
    const KIND: &'static str = "trigram-lm";
    fn check(&self) -> improv_core::Result<()> {
        self.validate()
    }
}

impl Artifact for DualEncoder {
    const KIND: &'static str = "dual-encoder";
}

impl Artifact for RankerModel {
    const KIND: &'static str = "ranker";
    fn check(&self) -> improv_core::Result<()> {
        self.validate()
    }
}

#[derive(Serialize)]
struct EnvelopeOut<'a, T> {
    magic: &'a str,
    model_type: &'a str,
    version: u32,
    model: &'a T,
}

#[derive(Deserialize)]
struct Envelope<T> {
    magic: String,
    model_type: String,
    version: u32,
    model: T,
}

pub fn to_bytes<T: Artifact>(value: &T) -> Vec<u8> {
    let env = EnvelopeOut { magic: MAGIC, model_type: T::KIND, version: FORMAT_VERSION, model: value };
    serde_json::to_vec(&env).expect("artifact serialization cannot fail")
}

pub fn save<T: Artifact>(value: &T, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| ImprovError::io(parent, e))?;
    }
    fs::write(path, to_bytes(value)).map_err(|e| ImprovError::io(path, e))
}

fn check_header(path: &Path, magic: &str, kind: &str, version: u32, expected: &str) -> Result<()> {
    if magic != MAGIC {
        return Err(ImprovError::format(path, format!("not an improv artifact (magic {magic:?})")));
    }
    if kind != expected {
        return Err(ImprovError::format(path, format!("expected a {expected} artifact, found {kind}")));
    }
    if version != FORMAT_VERSION {
        return Err(ImprovError::format(
            path,
            format!("unsupported format version {version} (this build reads {FORMAT_VERSION})"),
        ));
    }
    Ok(())
}

pub fn from_bytes<T: Artifact>(bytes: &[u8], path: &Path) -> Result<T> {
    match serde_json::from_slice::<Envelope<T>>(bytes) {
        Ok(env) => {
            check_header(path, &env.magic, &env.model_type, env.version, T::KIND)?;
            env.model.check().map_err(|e| ImprovError::format(path, e.to_string()))?;
            Ok(env.model)
        }
        Err(e) => {
            // A readable header explains most failures better than the body error.
            if let Ok(head) = serde_json::from_slice::<Envelope<IgnoredAny>>(bytes) {
                check_header(path, &head.magic, &head.model_type, head.version, T::KIND)?;
            }
            Err(ImprovError::format(path, format!("corrupt artifact: {e}")))
        }
    }
}

pub fn load<T: Artifact>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| ImprovError::io(path, e))?;
    from_bytes(&bytes, path)
}

pub fn save_index<T: Artifact>(index: &T, path: &Path) -> Result<()> {
    save(index, path)
}

pub fn load_index<T: Artifact>(path: &Path) -> Result<T> {
    load(path)
}

/// Paths of the three feature models inside a models directory.
pub fn model_paths(dir: &Path) -> [PathBuf; 3] {
    [dir.join(TM_FILE), dir.join(LM_FILE), dir.join(MATCHER_FILE)]
}

pub fn load_feature_models(dir: &Path, text: TextConfig) -> Result<FeatureModels> {
    let [tm, lm, matcher] = model_paths(dir);
    Ok(FeatureModels { tm: load(&tm)?, lm: load(&lm)?, matcher: load(&matcher)?, text })
}
