//! Dual-encoder matching model.
//!
//! Query and response share one embedding table. A side is encoded as the
//! mean of its token embeddings, and the match score is the cosine of the two
//! encodings. Training minimizes the hinge loss
//! `max(0, margin - s(q, r+) + s(q, r-))` with SGD, drawing `negatives`
//! responses from other training pairs for each positive.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::Vocab;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatcherHyperParams {
    pub learning_rate: f64,
    pub margin: f64,
    pub negatives: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MatcherHyperParams {
    fn default() -> Self {
        Self { learning_rate: 0.5, margin: 0.5, negatives: 4, epochs: 20, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualEncoder {
    vocab: Vocab,
    dim: usize,
    /// Row-major `vocab.len() × dim`.
    embeddings: Vec<f64>,
    hyper: MatcherHyperParams,
    init_seed: u64,
}

/// Gradient of the loss with respect to each touched embedding row.
pub type EmbeddingGrads = BTreeMap<u32, Vec<f64>>;

impl DualEncoder {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn hyper_params(&self) -> &MatcherHyperParams {
        &self.hyper
    }

    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }

    pub fn embedding(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.embeddings[start..start + self.dim]
    }

    pub fn embedding_mut(&mut self, id: u32) -> &mut [f64] {
        let start = id as usize * self.dim;
        &mut self.embeddings[start..start + self.dim]
    }

    pub fn embeddings(&self) -> &[f64] {
        &self.embeddings
    }

    pub fn ids(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.vocab.id(t)).collect()
    }

    fn pool(&self, ids: &[u32]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        if ids.is_empty() {
            return out;
        }
        for &id in ids {
            for (o, e) in out.iter_mut().zip(self.embedding(id)) {
                *o += e;
            }
        }
        let n = ids.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
        out
    }

    pub fn score_ids(&self, q: &[u32], r: &[u32]) -> f64 {
        cosine(&self.pool(q), &self.pool(r)).0
    }

    /// Hinge loss of one positive against a set of negatives, with gradients.
    pub fn loss_and_grad(&self, q: &[u32], pos: &[u32], negs: &[&[u32]], margin: f64) -> (f64, EmbeddingGrads) {
        let qv = self.pool(q);
        let pv = self.pool(pos);
        let (s_pos, dq_pos, dp_pos) = cosine_grad(&qv, &pv);
        let mut loss = 0.0;
        let mut g_q = vec![0.0; self.dim];
        let mut g_p = vec![0.0; self.dim];
        let mut g_negs: Vec<(usize, Vec<f64>)> = Vec::new();
        for (k, neg) in negs.iter().enumerate() {
            let nv = self.pool(neg);
            let (s_neg, dq_neg, dn) = cosine_grad(&qv, &nv);
            let l = margin - s_pos + s_neg;
            if l > 0.0 {
                loss += l;
                for i in 0..self.dim {
                    g_q[i] += dq_neg[i] - dq_pos[i];
                    g_p[i] -= dp_pos[i];
                }
                g_negs.push((k, dn));
            }
        }
        let mut grads = EmbeddingGrads::new();
        if loss > 0.0 {
            self.spread(&mut grads, q, &g_q);
            self.spread(&mut grads, pos, &g_p);
            for (k, g) in &g_negs {
                self.spread(&mut grads, negs[*k], g);
            }
        }
        (loss, grads)
    }

    /// Distributes a pooled-vector gradient onto the rows that were averaged.
    fn spread(&self, grads: &mut EmbeddingGrads, ids: &[u32], g: &[f64]) {
        if ids.is_empty() {
            return;
        }
        let n = ids.len() as f64;
        for &id in ids {
            let row = grads.entry(id).or_insert_with(|| vec![0.0; self.dim]);
            for (r, gi) in row.iter_mut().zip(g) {
                *r += gi / n;
            }
        }
    }
}

/// Cosine similarity and the norms it was built from. Zero vectors score 0.
fn cosine(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|x| x * x).sum());
    let nb = libm::sqrt(b.iter().map(|x| x * x).sum());
    if na == 0.0 || nb == 0.0 {
        return (0.0, na, nb);
    }
    ((dot / (na * nb)).clamp(-1.0, 1.0), na, nb)
}

/// `(s, ∂s/∂a, ∂s/∂b)` for `s = cos(a, b)`.
fn cosine_grad(a: &[f64], b: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na2: f64 = a.iter().map(|x| x * x).sum();
    let nb2: f64 = b.iter().map(|x| x * x).sum();
    if na2 == 0.0 || nb2 == 0.0 {
        return (0.0, vec![0.0; a.len()], vec![0.0; b.len()]);
    }
    let inv = 1.0 / libm::sqrt(na2 * nb2);
    let s = dot * inv;
    let da = a.iter().zip(b).map(|(ai, bi)| bi * inv - s * ai / na2).collect();
    let db = a.iter().zip(b).map(|(ai, bi)| ai * inv - s * bi / nb2).collect();
    (s, da, db)
}

/// Uniform(−0.1, 0.1) embeddings for `vocab` from a seeded generator.
pub fn init_matcher(vocab: Vocab, dim: usize, seed: u64) -> Result<DualEncoder> {
    if dim == 0 {
        return Err(Error::InvalidArgument("embedding dimension must be at least 1".into()));
    }
    if vocab.is_empty() {
        return Err(Error::InsufficientData("matcher vocabulary is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let embeddings = (0..vocab.len() * dim)
        .map(|_| loop {
            let x: f64 = rng.gen_range(-0.1..0.1);
            if x != -0.1 {
                break x;
            }
        })
        .collect();
    Ok(DualEncoder { vocab, dim, embeddings, hyper: MatcherHyperParams::default(), init_seed: seed })
}

/// Cosine of mean-pooled embeddings; OOV tokens use `<unk>`, empty sides score 0.
pub fn match_score(model: &DualEncoder, q_tokens: &[String], r_tokens: &[String]) -> f64 {
    model.score_ids(&model.ids(q_tokens), &model.ids(r_tokens))
}

/// SGD over `positives`; negatives are responses of other pairs.
pub fn train_matcher(
    mut model: DualEncoder,
    positives: &[(Vec<String>, Vec<String>)],
    hyper: MatcherHyperParams,
) -> Result<DualEncoder> {
    if positives.len() < 2 {
        return Err(Error::InsufficientData("matcher training needs at least 2 positive pairs".into()));
    }
    if !(hyper.learning_rate.is_finite() && hyper.learning_rate > 0.0) {
        return Err(Error::InvalidArgument("learning rate must be positive".into()));
    }
    model.hyper = hyper;
    let encoded: Vec<(Vec<u32>, Vec<u32>)> =
        positives.iter().map(|(q, r)| (model.ids(q), model.ids(r))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut neg_idx = Vec::with_capacity(hyper.negatives);

    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            neg_idx.clear();
            for _ in 0..hyper.negatives {
                // Uniform over every other pair.
                let j = rng.gen_range(0..encoded.len() - 1);
                neg_idx.push(if j >= i { j + 1 } else { j });
            }
            let negs: Vec<&[u32]> = neg_idx.iter().map(|&j| encoded[j].1.as_slice()).collect();
            let (q, pos) = &encoded[i];
            let (loss, grads) = model.loss_and_grad(q, pos, &negs, hyper.margin);
            if loss == 0.0 {
                continue;
            }
            for (id, g) in grads {
                for (e, gi) in model.embedding_mut(id).iter_mut().zip(&g) {
                    *e -= hyper.learning_rate * gi;
                }
            }
        }
    }
    Ok(model)
}
