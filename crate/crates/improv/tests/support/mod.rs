//! Drives the `improv` binary over the bundled seed corpus.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_improv"));
    c.env("RUST_LOG", "warn");
    c
}

pub fn seed(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/seed").join(name)
}

pub fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(out.status.success(), "improv {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Extracts, indexes and trains every artifact from the seed corpus into
/// `dir`, then writes `dir/improv.toml` with `extra` appended.
pub fn build_seed_artifacts(dir: &Path, extra: &str) -> PathBuf {
    let p = |s: &str| dir.join(s).to_str().unwrap().to_string();
    let (pairs, sentences, labels) =
        (seed("pairs.jsonl"), seed("sentences.jsonl"), seed("labels.jsonl"));
    let (pairs, sentences, labels) =
        (pairs.to_str().unwrap(), sentences.to_str().unwrap(), labels.to_str().unwrap());
    run(&["extract", "--pairs", pairs, "--sentences", sentences, "--out", &p("triples.jsonl")]);
    run(&["index", "--triples", &p("triples.jsonl"), "--out", &p("index")]);
    run(&["index", "--pairs", pairs, "--out", &p("index")]);
    run(&["train-tm", "--pairs", pairs, "--iters", "10", "--out", &p("models/tm.json")]);
    run(&["train-lm", "--sentences", sentences, "--out", &p("models/lm.json")]);
    run(&["train-matcher", "--pairs", pairs, "--dim", "16", "--epochs", "20", "--seed", "42", "--out", &p("models/matcher.json")]);
    run(&["train-ranker", "--labels", labels, "--models", &p("models"), "--out", &p("ranker.json")]);
    let config = dir.join("improv.toml");
    std::fs::write(&config, extra).unwrap();
    config
}
