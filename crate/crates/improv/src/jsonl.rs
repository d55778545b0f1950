//! Line-delimited JSON input and output.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{ImprovError, Result};

/// A standalone chat sentence record: `{"text": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub text: String,
}

/// Parsed line or the reason it was skipped.
pub type Line<T> = std::result::Result<T, String>;

/// Streams records from a JSONL file. Blank lines are ignored; lines that do
/// not parse are yielded as `Err` with a description.
pub fn read_lines<T: DeserializeOwned>(path: &Path) -> Result<impl Iterator<Item = Line<T>>> {
    let file = File::open(path).map_err(|e| ImprovError::io(path, e))?;
    let display = path.display().to_string();
    let lines = BufReader::new(file).lines().enumerate().filter_map(move |(no, line)| match line {
        Err(e) => Some(Err(format!("{display}:{}: {e}", no + 1))),
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(serde_json::from_str(&l).map_err(|e| format!("{display}:{}: {e}", no + 1))),
    });
    Ok(lines)
}

/// Reads every well-formed record, logging and counting the rest.
pub fn read_all<T: DeserializeOwned>(path: &Path) -> Result<(Vec<T>, u64)> {
    let mut out = Vec::new();
    let mut bad = 0;
    for line in read_lines(path)? {
        match line {
            Ok(v) => out.push(v),
            Err(msg) => {
                log::warn!("skipping malformed record {msg}");
                bad += 1;
            }
        }
    }
    Ok((out, bad))
}

pub fn write_all<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<()> {
    let file = File::create(path).map_err(|e| ImprovError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| ImprovError::format(path, e.to_string()))?;
        w.write_all(b"\n").map_err(|e| ImprovError::io(path, e))?;
    }
    w.flush().map_err(|e| ImprovError::io(path, e))
}
