//! Build-once inverted index with BM25 ranking.
//!
//! Documents get dense ids from 0 in insertion order. Each posting list is
//! sorted by doc id. Scoring uses the non-negative IDF variant
//!
//! ```text
//! idf(t)   = ln(1 + (N - df + 0.5) / (df + 0.5))
//! score    = Σ_t idf(t) · tf·(k1+1) / (tf + k1·(1 - b + b·len/avg_len))
//! ```
//!
//! where the sum runs over query tokens (a repeated query token contributes
//! once per occurrence). Each document's term contributions are added in
//! ascending order, so a score does not depend on query token order and equal
//! contribution multisets give bit-identical scores.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TextConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("k1 must be > 0, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidArgument(alloc::format!("b must be in [0, 1], got {}", self.b)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct Posting {
    pub doc_id: u32,
    pub tf: u32,
}

impl From<(u32, u32)> for Posting {
    fn from((doc_id, tf): (u32, u32)) -> Self {
        Self { doc_id, tf }
    }
}

impl From<Posting> for (u32, u32) {
    fn from(p: Posting) -> Self {
        (p.doc_id, p.tf)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedDoc<P> {
    pub doc_id: u32,
    pub searchable_text: String,
    pub payload: P,
    pub token_count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalHit<'a, P> {
    pub doc: &'a IndexedDoc<P>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex<P> {
    postings: BTreeMap<String, Vec<Posting>>,
    docs: Vec<IndexedDoc<P>>,
    avg_doc_len: f64,
    params: Bm25Params,
    text: TextConfig,
    rejected_empty: u64,
}

/// Accumulates documents, then freezes them into an [`InvertedIndex`].
#[derive(Debug)]
pub struct IndexBuilder<P> {
    postings: BTreeMap<String, Vec<Posting>>,
    docs: Vec<IndexedDoc<P>>,
    total_len: u64,
    params: Bm25Params,
    text: TextConfig,
    rejected_empty: u64,
}

impl<P> IndexBuilder<P> {
    pub fn new(params: Bm25Params, text: TextConfig) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            postings: BTreeMap::new(),
            docs: Vec::new(),
            total_len: 0,
            params,
            text,
            rejected_empty: 0,
        })
    }

    /// Adds a document; returns its id, or `None` when the text has no tokens.
    pub fn add(&mut self, searchable_text: String, payload: P) -> Option<u32> {
        let tokens = self.text.tokenize(&searchable_text);
        if tokens.is_empty() {
            self.rejected_empty += 1;
            return None;
        }
        let doc_id = u32::try_from(self.docs.len()).expect("more than u32::MAX documents");
        let mut tf: BTreeMap<&str, u32> = BTreeMap::new();
        for t in &tokens {
            *tf.entry(t.as_str()).or_insert(0) += 1;
        }
        for (term, count) in tf {
            // Ids only grow, so pushing keeps every list sorted.
            match self.postings.get_mut(term) {
                Some(list) => list.push(Posting { doc_id, tf: count }),
                None => {
                    self.postings.insert(term.into(), vec![Posting { doc_id, tf: count }]);
                }
            }
        }
        let token_count = tokens.len() as u32;
        self.total_len += u64::from(token_count);
        self.docs.push(IndexedDoc { doc_id, searchable_text, payload, token_count });
        Some(doc_id)
    }

    pub fn build(self) -> InvertedIndex<P> {
        let avg_doc_len = if self.docs.is_empty() {
            0.0
        } else {
            self.total_len as f64 / self.docs.len() as f64
        };
        InvertedIndex {
            postings: self.postings,
            docs: self.docs,
            avg_doc_len,
            params: self.params,
            text: self.text,
            rejected_empty: self.rejected_empty,
        }
    }
}

/// Builds an index from `(searchable_text, payload)` pairs.
pub fn build_index<P, I>(docs: I, params: Bm25Params, text: TextConfig) -> Result<InvertedIndex<P>>
where
    I: IntoIterator<Item = (String, P)>,
{
    let mut builder = IndexBuilder::new(params, text)?;
    for (searchable, payload) in docs {
        builder.add(searchable, payload);
    }
    Ok(builder.build())
}

pub fn idf(doc_count: usize, df: usize) -> f64 {
    let n = doc_count as f64;
    let df = df as f64;
    libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
}

impl<P> InvertedIndex<P> {
    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn text_config(&self) -> &TextConfig {
        &self.text
    }

    /// Documents dropped at build time because they had no tokens.
    pub fn rejected_empty(&self) -> u64 {
        self.rejected_empty
    }

    pub fn doc(&self, doc_id: u32) -> Option<&IndexedDoc<P>> {
        self.docs.get(doc_id as usize)
    }

    pub fn docs(&self) -> &[IndexedDoc<P>] {
        &self.docs
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    fn term_weight(&self, idf: f64, tf: u32, doc_len: u32) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = f64::from(tf);
        let norm = 1.0 - b + b * f64::from(doc_len) / self.avg_doc_len;
        idf * (tf * (k1 + 1.0)) / (tf + k1 * norm)
    }

    pub fn bm25_score(&self, query_tokens: &[String], doc_id: u32) -> Result<f64> {
        let doc = self.doc(doc_id).ok_or(Error::UnknownDocument(doc_id))?;
        let mut parts = Vec::new();
        for term in query_tokens {
            let list = self.postings(term);
            if let Ok(pos) = list.binary_search_by_key(&doc_id, |p| p.doc_id) {
                let idf = idf(self.docs.len(), list.len());
                parts.push(self.term_weight(idf, list[pos].tf, doc.token_count));
            }
        }
        parts.sort_unstable_by(f64::total_cmp);
        Ok(parts.iter().sum())
    }

    /// Top `top_n` documents by BM25 against `query_text`, best first.
    ///
    /// Only documents with a positive score are returned; equal scores are
    /// ordered by ascending doc id.
    pub fn retrieve(&self, query_text: &str, top_n: usize) -> Vec<RetrievalHit<'_, P>> {
        let tokens = self.text.tokenize(query_text);
        self.retrieve_tokens(&tokens, top_n)
    }

    pub fn retrieve_tokens(&self, query_tokens: &[String], top_n: usize) -> Vec<RetrievalHit<'_, P>> {
        if top_n == 0 || self.docs.is_empty() {
            return Vec::new();
        }
        let mut parts: Vec<(u32, f64)> = Vec::new();
        for term in query_tokens {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            let idf = idf(self.docs.len(), list.len());
            parts.extend(list.iter().map(|p| {
                (p.doc_id, self.term_weight(idf, p.tf, self.docs[p.doc_id as usize].token_count))
            }));
        }
        parts.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut hits: Vec<(u32, f64)> = Vec::new();
        for (doc_id, w) in parts {
            match hits.last_mut() {
                Some(last) if last.0 == doc_id => last.1 += w,
                _ => hits.push((doc_id, w)),
            }
        }
        hits.retain(|&(_, s)| s > 0.0);
        hits.sort_unstable_by(hit_order);
        hits.truncate(top_n);
        hits.into_iter()
            .map(|(id, score)| RetrievalHit { doc: &self.docs[id as usize], score })
            .collect()
    }

    /// Checks the structural invariants; used after deserializing.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let mut total = 0u64;
        for (i, d) in self.docs.iter().enumerate() {
            if d.doc_id as usize != i {
                return Err(Error::InvalidArgument(alloc::format!("doc at position {i} has id {}", d.doc_id)));
            }
            total += u64::from(d.token_count);
        }
        for (term, list) in &self.postings {
            if list.is_empty() {
                return Err(Error::InvalidArgument(alloc::format!("empty posting list for {term:?}")));
            }
            for w in list.windows(2) {
                if w[0].doc_id >= w[1].doc_id {
                    return Err(Error::InvalidArgument(alloc::format!("posting list for {term:?} is not sorted")));
                }
            }
            if let Some(p) = list.iter().find(|p| p.doc_id as usize >= self.docs.len()) {
                return Err(Error::UnknownDocument(p.doc_id));
            }
        }
        let expected = if self.docs.is_empty() { 0.0 } else { total as f64 / self.docs.len() as f64 };
        if self.avg_doc_len != expected {
            return Err(Error::InvalidArgument("average document length does not match documents".into()));
        }
        Ok(())
    }
}

fn hit_order(a: &(u32, f64), b: &(u32, f64)) -> Ordering {
    b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
}
