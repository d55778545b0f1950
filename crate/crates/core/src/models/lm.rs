//! Interpolated trigram language model used as a fluency feature.
//!
//! Each sentence is padded with two start markers and one end marker.
//! Tokens seen fewer than `min_count` times become `<unk>`. The next-word
//! distribution mixes three components:
//!
//! ```text
//! P(w | u v) = λ1·P1(w) + λ2·P2(w | v) + λ3·P3(w | u v)
//! P1(w)      = (c(w) + 1) / (T + V)                     add-one unigram
//! P2(w | v)  = c(v w) / c(v ·)      or P1(w)     when c(v ·) = 0
//! P3(w | uv) = c(u v w) / c(u v ·)  or P2(w | v) when c(u v ·) = 0
//! ```
//!
//! `V` counts every predictable type (words, `<unk>`, `</s>`) and `T` the
//! predicted tokens. Each component is normalized over that set, so the mix is
//! too, and `λ1 > 0` keeps every probability positive.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::vocab::Vocab;
use crate::error::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
const BOS_ID: u32 = 1;
const EOS_ID: u32 = 2;

/// Interpolation weights `(unigram, bigram, trigram)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambdas {
    pub unigram: f64,
    pub bigram: f64,
    pub trigram: f64,
}

impl Default for Lambdas {
    fn default() -> Self {
        Self { unigram: 0.1, bigram: 0.3, trigram: 0.6 }
    }
}

impl Lambdas {
    pub fn validate(&self) -> Result<()> {
        let all = [self.unigram, self.bigram, self.trigram];
        if all.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument("interpolation weights must be finite and non-negative".into()));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("interpolation weights must sum to 1".into()));
        }
        if self.unigram <= 0.0 {
            return Err(Error::InvalidArgument("unigram weight must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigramLm {
    vocab: Vocab,
    lambdas: Lambdas,
    min_count: u64,
    unigram: Vec<u64>,
    unigram_total: u64,
    /// Sorted `((v, w), count)`.
    bigram: Vec<((u32, u32), u64)>,
    /// Sorted `(v, Σ_w c(v w))`.
    bigram_ctx: Vec<(u32, u64)>,
    trigram: Vec<((u32, u32, u32), u64)>,
    trigram_ctx: Vec<((u32, u32), u64)>,
}

fn lookup<K: Ord + Copy>(table: &[(K, u64)], key: K) -> u64 {
    table.binary_search_by_key(&key, |&(k, _)| k).map_or(0, |i| table[i].1)
}

impl TrigramLm {
    pub fn lambdas(&self) -> Lambdas {
        self.lambdas
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// Maps a token (or marker) to the id used for counting.
    pub fn token_id(&self, token: &str) -> u32 {
        self.vocab.id(token)
    }

    /// Number of outcomes a next-word distribution ranges over.
    fn predictable_types(&self) -> u64 {
        // Every id except the start marker.
        self.vocab.len() as u64 - 1
    }

    fn p_unigram(&self, w: u32) -> f64 {
        (self.unigram[w as usize] + 1) as f64 / (self.unigram_total + self.predictable_types()) as f64
    }

    fn p_bigram(&self, v: u32, w: u32) -> f64 {
        match lookup(&self.bigram_ctx, v) {
            0 => self.p_unigram(w),
            ctx => lookup(&self.bigram, (v, w)) as f64 / ctx as f64,
        }
    }

    fn p_trigram(&self, u: u32, v: u32, w: u32) -> f64 {
        match lookup(&self.trigram_ctx, (u, v)) {
            0 => self.p_bigram(v, w),
            ctx => lookup(&self.trigram, (u, v, w)) as f64 / ctx as f64,
        }
    }

    pub fn prob_ids(&self, u: u32, v: u32, w: u32) -> f64 {
        let l = self.lambdas;
        l.unigram * self.p_unigram(w) + l.bigram * self.p_bigram(v, w) + l.trigram * self.p_trigram(u, v, w)
    }

    /// `P(w | u v)`; out-of-vocabulary tokens are read as `<unk>`.
    pub fn prob(&self, u: &str, v: &str, w: &str) -> f64 {
        self.prob_ids(self.token_id(u), self.token_id(v), self.token_id(w))
    }

    /// Full next-word distribution after the context `u v`.
    pub fn next_distribution(&self, u: &str, v: &str) -> Vec<(&str, f64)> {
        let (u, v) = (self.token_id(u), self.token_id(v));
        self.vocab
            .words()
            .iter()
            .enumerate()
            .filter(|&(id, _)| id as u32 != BOS_ID)
            .map(|(id, word)| (word.as_str(), self.prob_ids(u, v, id as u32)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.lambdas.validate()?;
        let words = self.vocab.words();
        if words.len() < 3 || words[1] != BOS || words[2] != EOS || self.unigram.len() != words.len() {
            return Err(Error::InvalidArgument("language model vocabulary is malformed".into()));
        }
        Ok(())
    }
}

/// Trains the interpolated trigram model. `min_count` is normally 2.
pub fn train_lm(sentences: &[Vec<String>], lambdas: Lambdas, min_count: u64) -> Result<TrigramLm> {
    lambdas.validate()?;
    if sentences.is_empty() {
        return Err(Error::InsufficientData("language model needs at least one sentence".into()));
    }
    let kept = Vocab::from_tokens(sentences.iter().flatten().map(String::as_str), min_count.max(1));
    let vocab = Vocab::from_words(
        [BOS.into(), EOS.into()]
            .into_iter()
            .chain(kept.words().iter().skip(1).filter(|w| *w != BOS && *w != EOS).cloned()),
    );
    debug_assert_eq!(vocab.id(BOS), BOS_ID);
    debug_assert_eq!(vocab.id(EOS), EOS_ID);

    let mut unigram = alloc::vec![0u64; vocab.len()];
    let mut unigram_total = 0u64;
    let mut bigram: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut bigram_ctx: BTreeMap<u32, u64> = BTreeMap::new();
    let mut trigram: BTreeMap<(u32, u32, u32), u64> = BTreeMap::new();
    let mut trigram_ctx: BTreeMap<(u32, u32), u64> = BTreeMap::new();

    for sentence in sentences {
        let (mut u, mut v) = (BOS_ID, BOS_ID);
        let ids = sentence.iter().map(|w| vocab.id(w)).chain(core::iter::once(EOS_ID));
        for w in ids {
            unigram[w as usize] += 1;
            unigram_total += 1;
            *bigram.entry((v, w)).or_insert(0) += 1;
            *bigram_ctx.entry(v).or_insert(0) += 1;
            *trigram.entry((u, v, w)).or_insert(0) += 1;
            *trigram_ctx.entry((u, v)).or_insert(0) += 1;
            u = v;
            v = w;
        }
    }
    Ok(TrigramLm {
        vocab,
        lambdas,
        min_count,
        unigram,
        unigram_total,
        bigram: bigram.into_iter().collect(),
        bigram_ctx: bigram_ctx.into_iter().collect(),
        trigram: trigram.into_iter().collect(),
        trigram_ctx: trigram_ctx.into_iter().collect(),
    })
}

/// Mean log-probability per token, counting the end marker.
pub fn lm_score(model: &TrigramLm, r_tokens: &[String]) -> f64 {
    let (mut u, mut v) = (BOS_ID, BOS_ID);
    let mut total = 0.0;
    let ids = r_tokens.iter().map(|w| model.token_id(w)).chain(core::iter::once(EOS_ID));
    for w in ids {
        total += libm::log(model.prob_ids(u, v, w));
        u = v;
        v = w;
    }
    total / (r_tokens.len() + 1) as f64
}
