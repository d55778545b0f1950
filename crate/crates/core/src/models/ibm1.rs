//! IBM Model 1 translation table trained by expectation maximization.
//!
//! Source sentences are candidate responses and target sentences are queries,
//! so the table models `t(query word | response word)`. Every source sentence
//! gets an implicit NULL word at position 0.
//!
//! Only co-occurring (source, target) cells are stored. Uniform initialization
//! gives every cell the same weight, so the first E-step is identical to a
//! dense uniform start, and cells that never co-occur receive no expected
//! counts and stay at zero after the first M-step.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::vocab::Vocab;
use super::LOG_FLOOR;
use crate::error::{Error, Result};

pub const NULL_TOKEN: &str = "<null>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationTable {
    /// Source vocabulary; id 0 doubles as NULL (the unknown slot is never a real word).
    src_vocab: Vocab,
    tgt_vocab: Vocab,
    /// Per source id, `(target id, probability)` sorted by target id.
    rows: Vec<Vec<(u32, f64)>>,
    iterations: usize,
    /// Corpus log-likelihood before each M-step, then once more after the last.
    log_likelihood: Vec<f64>,
}

impl TranslationTable {
    /// `t(tgt | src)`. Pass [`NULL_TOKEN`] as `src` for the NULL word.
    pub fn prob(&self, tgt: &str, src: &str) -> f64 {
        let Some(t) = self.tgt_vocab.get(tgt) else { return 0.0 };
        let s = if src == NULL_TOKEN {
            0
        } else {
            match self.src_vocab.get(src) {
                Some(s) => s,
                None => return 0.0,
            }
        };
        self.prob_ids(t, s)
    }

    fn prob_ids(&self, tgt: u32, src: u32) -> f64 {
        let row = &self.rows[src as usize];
        row.binary_search_by_key(&tgt, |&(t, _)| t).map_or(0.0, |i| row[i].1)
    }

    /// Source words, excluding NULL.
    pub fn source_words(&self) -> impl Iterator<Item = &str> {
        self.src_vocab.words().iter().skip(1).map(String::as_str)
    }

    pub fn target_words(&self) -> impl Iterator<Item = &str> {
        self.tgt_vocab.words().iter().skip(1).map(String::as_str)
    }

    /// Sum of `t(w | src)` over all target words.
    pub fn row_sum(&self, src: &str) -> f64 {
        let id = if src == NULL_TOKEN { Some(0) } else { self.src_vocab.get(src) };
        id.map_or(0.0, |id| self.rows[id as usize].iter().map(|&(_, p)| p).sum())
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn log_likelihood(&self) -> &[f64] {
        &self.log_likelihood
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.src_vocab.len() {
            return Err(Error::InvalidArgument("translation rows do not match source vocabulary".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            let mut sum = 0.0;
            for &(t, p) in row {
                if t as usize >= self.tgt_vocab.len() || !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::InvalidArgument(alloc::format!("bad cell in translation row {i}")));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidArgument(alloc::format!("translation row {i} sums to {sum}")));
            }
        }
        Ok(())
    }
}

/// Trains IBM Model 1 on `(source tokens, target tokens)` pairs.
///
/// Pairs with an empty target side carry no alignment evidence and are
/// skipped.
pub fn train_ibm1(pairs: &[(Vec<String>, Vec<String>)], iterations: usize) -> Result<TranslationTable> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    let usable: Vec<&(Vec<String>, Vec<String>)> = pairs.iter().filter(|(_, t)| !t.is_empty()).collect();
    if usable.is_empty() {
        return Err(Error::InsufficientData("translation model needs at least one pair with a non-empty target".into()));
    }

    // NULL sits at source id 0 through Vocab's reserved slot.
    let src_vocab = Vocab::from_tokens(usable.iter().flat_map(|(s, _)| s.iter().map(String::as_str)), 1);
    let tgt_vocab = Vocab::from_tokens(usable.iter().flat_map(|(_, t)| t.iter().map(String::as_str)), 1);

    let encoded: Vec<(Vec<u32>, Vec<u32>)> = usable
        .iter()
        .map(|(s, t)| {
            let mut src = Vec::with_capacity(s.len() + 1);
            src.push(0);
            src.extend(s.iter().map(|w| src_vocab.id(w)));
            (src, t.iter().map(|w| tgt_vocab.id(w)).collect())
        })
        .collect();

    // Cell layout: one flat slot per co-occurring (src, tgt) pair, grouped by src.
    let mut cooc: Vec<BTreeMap<u32, usize>> = vec![BTreeMap::new(); src_vocab.len()];
    for (src, tgt) in &encoded {
        for &s in src {
            for &t in tgt {
                cooc[s as usize].entry(t).or_insert(0);
            }
        }
    }
    let mut row_start = Vec::with_capacity(cooc.len() + 1);
    let mut slot_tgt = Vec::new();
    for row in cooc.iter_mut() {
        row_start.push(slot_tgt.len());
        for (t, slot) in row.iter_mut() {
            *slot = slot_tgt.len();
            slot_tgt.push(*t);
        }
    }
    row_start.push(slot_tgt.len());

    // For each pair, the slot of every (target position, source position) cell.
    let links: Vec<Vec<usize>> = encoded
        .iter()
        .map(|(src, tgt)| {
            let mut l = Vec::with_capacity(src.len() * tgt.len());
            for &t in tgt {
                for &s in src {
                    l.push(cooc[s as usize][&t]);
                }
            }
            l
        })
        .collect();
    drop(cooc);

    // Real target words exclude the reserved unknown slot.
    let uniform = 1.0 / (tgt_vocab.len() - 1) as f64;
    let mut t = vec![uniform; slot_tgt.len()];
    let mut counts = vec![0.0; slot_tgt.len()];
    let mut history = Vec::with_capacity(iterations + 1);

    for _ in 0..iterations {
        counts.iter_mut().for_each(|c| *c = 0.0);
        let mut ll = 0.0;
        for ((src, _), link) in encoded.iter().zip(&links) {
            let width = src.len();
            for cells in link.chunks_exact(width) {
                let denom: f64 = cells.iter().map(|&slot| t[slot]).sum();
                ll += libm::log(denom / width as f64);
                for &slot in cells {
                    counts[slot] += t[slot] / denom;
                }
            }
        }
        history.push(ll);
        for w in row_start.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let total: f64 = counts[lo..hi].iter().sum();
            if total > 0.0 {
                for slot in lo..hi {
                    t[slot] = counts[slot] / total;
                }
            }
        }
    }
    history.push(corpus_log_likelihood(&encoded, &links, &t));

    let rows = row_start
        .windows(2)
        .map(|w| (w[0]..w[1]).map(|slot| (slot_tgt[slot], t[slot])).collect())
        .collect();
    Ok(TranslationTable { src_vocab, tgt_vocab, rows, iterations, log_likelihood: history })
}

fn corpus_log_likelihood(encoded: &[(Vec<u32>, Vec<u32>)], links: &[Vec<usize>], t: &[f64]) -> f64 {
    let mut ll = 0.0;
    for ((src, _), link) in encoded.iter().zip(links) {
        for cells in link.chunks_exact(src.len()) {
            let denom: f64 = cells.iter().map(|&slot| t[slot]).sum();
            ll += libm::log(denom / src.len() as f64);
        }
    }
    ll
}

/// Mean per-query-token log-probability that the candidate generates the query.
///
/// Query words the table never saw contribute `ln(1e-12)`.
pub fn tm_score(table: &TranslationTable, q_tokens: &[String], r_tokens: &[String]) -> Result<f64> {
    if q_tokens.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let src: Vec<u32> = core::iter::once(0)
        .chain(r_tokens.iter().filter_map(|w| table.src_vocab.get(w)))
        .collect();
    let norm = 1.0 / (r_tokens.len() + 1) as f64;
    let mut total = 0.0;
    for w in q_tokens {
        let inner = match table.tgt_vocab.get(w) {
            Some(tid) => src.iter().map(|&s| table.prob_ids(tid, s)).sum::<f64>(),
            None => 0.0,
        };
        total += libm::log(norm * inner + LOG_FLOOR);
    }
    Ok(total / q_tokens.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn sent(s: &str) -> Vec<String> {
        s.split_whitespace().map(ToString::to_string).collect()
    }

    fn corpus(pairs: &[(&str, &str)]) -> Vec<(Vec<String>, Vec<String>)> {
        pairs.iter().map(|(s, t)| (sent(s), sent(t))).collect()
    }

    #[test]
    fn single_pair_is_deterministic() {
        let table = train_ibm1(&corpus(&[("a", "x")]), 1).unwrap();
        assert_eq!(table.prob("x", "a"), 1.0);
        assert_eq!(table.prob("x", NULL_TOKEN), 1.0);
        table.validate().unwrap();
    }

    #[test]
    fn empty_corpus_and_zero_iterations_fail() {
        assert!(matches!(train_ibm1(&[], 3), Err(Error::InsufficientData(_))));
        assert!(matches!(train_ibm1(&corpus(&[("a", "x")]), 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tm_score_trivial_table() {
        let table = train_ibm1(&corpus(&[("a", "x")]), 1).unwrap();
        let s = tm_score(&table, &sent("x"), &sent("a")).unwrap();
        assert!((s - libm::log(1.0 + LOG_FLOOR)).abs() < 1e-15);
        assert!(s.abs() < 1e-11);
    }

    #[test]
    fn unknown_query_word_hits_the_floor() {
        let table = train_ibm1(&corpus(&[("a", "x")]), 1).unwrap();
        let s = tm_score(&table, &sent("zzz"), &sent("a")).unwrap();
        assert_eq!(s, libm::log(LOG_FLOOR));
        assert!(s.is_finite());
        assert_eq!(tm_score(&table, &[], &sent("a")), Err(Error::EmptyQuery));
    }

    #[test]
    fn tm_score_ignores_candidate_order() {
        let table = train_ibm1(&corpus(&[("a b c", "x y"), ("b c", "y z"), ("a", "x")]), 5).unwrap();
        let q = sent("x y z");
        let s1 = tm_score(&table, &q, &sent("a b c")).unwrap();
        let s2 = tm_score(&table, &q, &sent("c a b")).unwrap();
        assert!((s1 - s2).abs() < 1e-12);
    }

    #[test]
    fn rows_are_stochastic_after_training() {
        let table = train_ibm1(&corpus(&[("a b", "x y"), ("b c", "y z w"), ("", "x")]), 4).unwrap();
        for src in table.source_words().chain([NULL_TOKEN]) {
            assert!((table.row_sum(src) - 1.0).abs() < 1e-9, "{src}");
        }
        assert_eq!(table.log_likelihood().len(), 5);
    }
}
