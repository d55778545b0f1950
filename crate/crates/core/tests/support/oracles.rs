//! Reference computations used to check the production code paths.
//!
//! Nothing here calls into the structures under test beyond reading their
//! public outputs: BM25 scores every document from raw tokens, IBM Model 1
//! runs a dense EM over full vocabularies, and the trigram oracle recounts
//! n-grams straight from the sentences.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Exhaustive BM25: score every document, keep positives, sort by
/// (score desc, id asc), truncate.
pub fn bm25_rank(docs: &[Vec<String>], query: &[String], k1: f64, b: f64, top_n: usize) -> Vec<(u32, f64)> {
    let n = docs.len();
    if n == 0 {
        return Vec::new();
    }
    let avg = docs.iter().map(Vec::len).sum::<usize>() as f64 / n as f64;
    let df: HashMap<&String, f64> =
        query.iter().map(|t| (t, docs.iter().filter(|doc| doc.contains(t)).count() as f64)).collect();
    let mut out: Vec<(u32, f64)> = (0..n)
        .map(|d| {
            let mut parts = Vec::new();
            for term in query {
                let tf = docs[d].iter().filter(|t| *t == term).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let idf = (1.0 + (n as f64 - df[term] + 0.5) / (df[term] + 0.5)).ln();
                let len = docs[d].len() as f64;
                parts.push(idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * len / avg)));
            }
            // Ascending-order summation makes equal contribution sets tie exactly.
            parts.sort_by(f64::total_cmp);
            (d as u32, parts.iter().sum())
        })
        .filter(|&(_, s)| s > 0.0)
        .collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    out.truncate(top_n);
    out
}

pub fn bm25_doc(docs: &[Vec<String>], d: usize, query: &[String], k1: f64, b: f64, avg: f64) -> f64 {
    let n = docs.len() as f64;
    let mut parts = Vec::new();
    for term in query {
        let tf = docs[d].iter().filter(|t| *t == term).count();
        if tf == 0 {
            continue;
        }
        let df = docs.iter().filter(|doc| doc.contains(term)).count() as f64;
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        let tf = tf as f64;
        let len = docs[d].len() as f64;
        parts.push(idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * len / avg)));
    }
    parts.sort_by(f64::total_cmp);
    parts.iter().sum()
}

/// Dense IBM Model 1. Source sentences get "<null>" prepended.
pub struct DenseIbm1 {
    pub src: Vec<String>,
    pub tgt: Vec<String>,
    pub t: Vec<Vec<f64>>,
    pub log_likelihood: Vec<f64>,
}

impl DenseIbm1 {
    pub fn prob(&self, tgt: &str, src: &str) -> f64 {
        match (self.src.iter().position(|s| s == src), self.tgt.iter().position(|t| t == tgt)) {
            (Some(s), Some(t)) => self.t[s][t],
            _ => 0.0,
        }
    }
}

pub fn dense_ibm1(pairs: &[(Vec<String>, Vec<String>)], iterations: usize) -> DenseIbm1 {
    let pairs: Vec<_> = pairs.iter().filter(|(_, t)| !t.is_empty()).collect();
    let mut src: Vec<String> = vec!["<null>".into()];
    let mut tgt: Vec<String> = Vec::new();
    for (s, t) in &pairs {
        for w in s {
            if !src.contains(w) {
                src.push(w.clone());
            }
        }
        for w in t {
            if !tgt.contains(w) {
                tgt.push(w.clone());
            }
        }
    }
    let si = |w: &str| src.iter().position(|x| x == w).unwrap();
    let ti = |w: &str| tgt.iter().position(|x| x == w).unwrap();
    let mut t = vec![vec![1.0 / tgt.len() as f64; tgt.len()]; src.len()];
    let mut ll_hist = Vec::new();
    for _ in 0..iterations {
        let mut count = vec![vec![0.0; tgt.len()]; src.len()];
        let mut ll = 0.0;
        for (s, tw) in &pairs {
            let sids: Vec<usize> = std::iter::once(0).chain(s.iter().map(|w| si(w))).collect();
            for w in tw {
                let f = ti(w);
                let z: f64 = sids.iter().map(|&e| t[e][f]).sum();
                ll += (z / sids.len() as f64).ln();
                for &e in &sids {
                    count[e][f] += t[e][f] / z;
                }
            }
        }
        ll_hist.push(ll);
        for e in 0..src.len() {
            let total: f64 = count[e].iter().sum();
            if total > 0.0 {
                for f in 0..tgt.len() {
                    t[e][f] = count[e][f] / total;
                }
            }
        }
    }
    DenseIbm1 { src, tgt, t, log_likelihood: ll_hist }
}

/// Recounts the interpolated trigram probability straight from `sentences`.
pub struct TrigramOracle {
    unigram: HashMap<String, u64>,
    bigram: HashMap<(String, String), u64>,
    trigram: HashMap<(String, String, String), u64>,
    total: u64,
    types: u64,
    lambdas: (f64, f64, f64),
    vocab: BTreeSet<String>,
}

impl TrigramOracle {
    pub fn new(sentences: &[Vec<String>], min_count: u64, lambdas: (f64, f64, f64)) -> Self {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for s in sentences {
            for w in s {
                *freq.entry(w).or_default() += 1;
            }
        }
        let vocab: BTreeSet<String> =
            freq.iter().filter(|(_, &c)| c >= min_count).map(|(w, _)| w.to_string()).collect();
        let mut o = TrigramOracle {
            unigram: HashMap::new(),
            bigram: HashMap::new(),
            trigram: HashMap::new(),
            total: 0,
            // words + <unk> + </s>
            types: vocab.len() as u64 + 2,
            lambdas,
            vocab,
        };
        for s in sentences {
            let mut seq = vec!["<s>".to_string(), "<s>".to_string()];
            seq.extend(s.iter().map(|w| o.map(w)));
            seq.push("</s>".into());
            for i in 2..seq.len() {
                *o.unigram.entry(seq[i].clone()).or_default() += 1;
                *o.bigram.entry((seq[i - 1].clone(), seq[i].clone())).or_default() += 1;
                *o.trigram.entry((seq[i - 2].clone(), seq[i - 1].clone(), seq[i].clone())).or_default() += 1;
                o.total += 1;
            }
        }
        o
    }

    pub fn map(&self, w: &str) -> String {
        if w == "<s>" || w == "</s>" || self.vocab.contains(w) {
            w.to_string()
        } else {
            "<unk>".to_string()
        }
    }

    pub fn outcomes(&self) -> Vec<String> {
        let mut v: Vec<String> = self.vocab.iter().cloned().collect();
        v.push("<unk>".into());
        v.push("</s>".into());
        v
    }

    pub fn prob(&self, u: &str, v: &str, w: &str) -> f64 {
        let (u, v, w) = (self.map(u), self.map(v), self.map(w));
        let c1 = *self.unigram.get(&w).unwrap_or(&0) as f64;
        let p1 = (c1 + 1.0) / (self.total + self.types) as f64;
        let ctx2: u64 = self.bigram.iter().filter(|((a, _), _)| *a == v).map(|(_, c)| c).sum();
        let p2 = if ctx2 == 0 {
            p1
        } else {
            *self.bigram.get(&(v.clone(), w.clone())).unwrap_or(&0) as f64 / ctx2 as f64
        };
        let ctx3: u64 = self.trigram.iter().filter(|((a, b, _), _)| *a == u && *b == v).map(|(_, c)| c).sum();
        let p3 = if ctx3 == 0 {
            p2
        } else {
            *self.trigram.get(&(u, v, w)).unwrap_or(&0) as f64 / ctx3 as f64
        };
        self.lambdas.0 * p1 + self.lambdas.1 * p2 + self.lambdas.2 * p3
    }
}

/// Central finite difference of `f` at `x`.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// Brute-force sort/filter: repeatedly extract the best remaining item under
/// (score desc, retrieval desc, index asc).
pub fn select_sort(items: &[(f64, f64, usize)], threshold: f64) -> Vec<usize> {
    let mut pool: Vec<(f64, f64, usize)> = items.iter().copied().filter(|x| x.0 >= threshold).collect();
    let mut out = Vec::new();
    while !pool.is_empty() {
        let mut best = 0;
        for i in 1..pool.len() {
            let (a, b) = (pool[i], pool[best]);
            let better = a.0 > b.0 || (a.0 == b.0 && (a.1 > b.1 || (a.1 == b.1 && a.2 < b.2)));
            if better {
                best = i;
            }
        }
        out.push(pool.remove(best).2);
    }
    out
}

pub fn sigmoid_ref(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Simple counter of how often each item occurs.
pub fn histogram<T: Ord + Clone>(items: &[T]) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for i in items {
        *m.entry(i.clone()).or_default() += 1;
    }
    m
}
