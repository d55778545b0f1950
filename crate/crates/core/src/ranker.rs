//! Relevance classifier over (query, candidate) feature vectors.
//!
//! Four features feed an L2-regularized logistic regression: the translation
//! score, the dual-encoder match, the language-model fluency of the candidate
//! and the first-stage BM25 score. The classifier probability is the ranking
//! score; candidates below the decision threshold are dropped.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{lm_score, match_score, tm_score, DualEncoder, TranslationTable, TrigramLm};
use crate::text::TextConfig;

pub const NUM_FEATURES: usize = 4;
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = ["tm", "match", "lm", "retrieval"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub tm: f64,
    #[serde(rename = "match")]
    pub matching: f64,
    pub lm: f64,
    pub retrieval: f64,
}

impl FeatureVector {
    pub fn from_array(a: [f64; NUM_FEATURES]) -> Self {
        Self { tm: a[0], matching: a[1], lm: a[2], retrieval: a[3] }
    }

    pub fn to_array(self) -> [f64; NUM_FEATURES] {
        [self.tm, self.matching, self.lm, self.retrieval]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

/// The trained feature models plus the tokenizer they were trained with.
#[derive(Debug, Clone)]
pub struct FeatureModels {
    pub tm: TranslationTable,
    pub lm: TrigramLm,
    pub matcher: DualEncoder,
    pub text: TextConfig,
}

/// Unstandardized features for one (query, candidate) pair.
pub fn featurize(models: &FeatureModels, q: &str, candidate: &str, retrieval_score: f64) -> Result<FeatureVector> {
    let q_tokens = models.text.tokenize(q);
    let r_tokens = models.text.tokenize(candidate);
    let tm = tm_score(&models.tm, &q_tokens, &r_tokens)?;
    Ok(FeatureVector {
        tm,
        matching: match_score(&models.matcher, &q_tokens, &r_tokens),
        lm: lm_score(&models.lm, &r_tokens),
        retrieval: retrieval_score,
    })
}

/// Per-feature affine standardization, fitted on training features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: [f64; NUM_FEATURES],
    pub std: [f64; NUM_FEATURES],
}

impl Default for Standardizer {
    fn default() -> Self {
        Self { mean: [0.0; NUM_FEATURES], std: [1.0; NUM_FEATURES] }
    }
}

impl Standardizer {
    /// Population mean/stddev; a constant feature keeps stddev 1.
    pub fn fit(rows: &[[f64; NUM_FEATURES]]) -> Self {
        if rows.is_empty() {
            return Self::default();
        }
        let n = rows.len() as f64;
        let mut mean = [0.0; NUM_FEATURES];
        let mut std = [0.0; NUM_FEATURES];
        for j in 0..NUM_FEATURES {
            mean[j] = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean[j]) * (r[j] - mean[j])).sum::<f64>() / n;
            let sd = libm::sqrt(var);
            std[j] = if sd > 1e-12 { sd } else { 1.0 };
        }
        Self { mean, std }
    }

    pub fn apply(&self, fv: FeatureVector) -> FeatureVector {
        let mut a = fv.to_array();
        for (j, x) in a.iter_mut().enumerate() {
            *x = (*x - self.mean[j]) / self.std[j];
        }
        FeatureVector::from_array(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankerHyperParams {
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub threshold: f64,
}

impl Default for RankerHyperParams {
    fn default() -> Self {
        Self { l2: 1e-4, epochs: 500, learning_rate: 0.1, threshold: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerModel {
    pub weights: [f64; NUM_FEATURES],
    pub bias: f64,
    pub threshold: f64,
    pub standardizer: Standardizer,
    pub hyper: RankerHyperParams,
    /// Regularized training loss after each epoch.
    #[serde(default)]
    pub loss_history: Vec<f64>,
}

impl Default for RankerModel {
    fn default() -> Self {
        Self {
            weights: [0.0; NUM_FEATURES],
            bias: 0.0,
            threshold: 0.5,
            standardizer: Standardizer::default(),
            hyper: RankerHyperParams::default(),
            loss_history: Vec::new(),
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

impl RankerModel {
    pub fn validate(&self) -> Result<()> {
        if !self.weights.iter().all(|w| w.is_finite()) || !self.bias.is_finite() {
            return Err(Error::InvalidArgument("ranker weights must be finite".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidArgument("ranker threshold must be in (0, 1)".into()));
        }
        Ok(())
    }

    /// Standardized features for scoring with this model.
    pub fn featurize(&self, models: &FeatureModels, q: &str, candidate: &str, retrieval_score: f64) -> Result<FeatureVector> {
        Ok(self.standardizer.apply(featurize(models, q, candidate, retrieval_score)?))
    }

    pub fn decision_value(&self, fv: &FeatureVector) -> f64 {
        self.weights.iter().zip(fv.to_array()).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    /// Relevance probability of an already standardized vector.
    pub fn score(&self, fv: &FeatureVector) -> f64 {
        sigmoid(self.decision_value(fv))
    }

    pub fn predict(&self, fv: &FeatureVector) -> bool {
        self.score(fv) >= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub query: String,
    pub candidate: String,
    pub label: u8,
    /// First-stage score, when the example came from a retrieval run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieval_score: Option<f64>,
}

impl LabeledExample {
    pub fn new(query: impl Into<String>, candidate: impl Into<String>, label: u8) -> Self {
        Self { query: query.into(), candidate: candidate.into(), label, retrieval_score: None }
    }
}

/// Mean log-loss plus `l2/2 · |w|²` (bias unregularized), with its gradient.
pub fn logistic_loss_and_grad(
    weights: &[f64; NUM_FEATURES],
    bias: f64,
    xs: &[[f64; NUM_FEATURES]],
    ys: &[u8],
    l2: f64,
) -> (f64, [f64; NUM_FEATURES], f64) {
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut gw = [0.0; NUM_FEATURES];
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = weights.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + bias;
        let y = f64::from(y);
        loss += softplus(z) - y * z;
        let err = sigmoid(z) - y;
        for j in 0..NUM_FEATURES {
            gw[j] += err * x[j];
        }
        gb += err;
    }
    loss /= n;
    gb /= n;
    for j in 0..NUM_FEATURES {
        gw[j] = gw[j] / n + l2 * weights[j];
        loss += 0.5 * l2 * weights[j] * weights[j];
    }
    (loss, gw, gb)
}

/// Full-batch gradient descent from zero weights.
///
/// A step that would raise the loss is retried with half the learning rate,
/// so the recorded loss never increases.
pub fn train_logistic(raw: &[[f64; NUM_FEATURES]], labels: &[u8], hyper: RankerHyperParams) -> Result<RankerModel> {
    if raw.len() != labels.len() {
        return Err(Error::InvalidArgument("feature and label counts differ".into()));
    }
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(Error::InsufficientData("ranker training needs both relevant and irrelevant examples".into()));
    }
    if !(hyper.threshold > 0.0 && hyper.threshold < 1.0) {
        return Err(Error::InvalidArgument("threshold must be in (0, 1)".into()));
    }
    if raw.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("training features must be finite".into()));
    }
    let standardizer = Standardizer::fit(raw);
    let xs: Vec<[f64; NUM_FEATURES]> =
        raw.iter().map(|r| standardizer.apply(FeatureVector::from_array(*r)).to_array()).collect();

    let mut w = [0.0; NUM_FEATURES];
    let mut b = 0.0;
    let mut lr = hyper.learning_rate;
    let (mut loss, mut gw, mut gb) = logistic_loss_and_grad(&w, b, &xs, labels, hyper.l2);
    let mut history = Vec::with_capacity(hyper.epochs);
    for _ in 0..hyper.epochs {
        let mut halvings = 0;
        loop {
            let mut w_new = w;
            for j in 0..NUM_FEATURES {
                w_new[j] -= lr * gw[j];
            }
            let b_new = b - lr * gb;
            let (l_new, gw_new, gb_new) = logistic_loss_and_grad(&w_new, b_new, &xs, labels, hyper.l2);
            if l_new <= loss {
                w = w_new;
                b = b_new;
                loss = l_new;
                gw = gw_new;
                gb = gb_new;
                break;
            }
            halvings += 1;
            if halvings > 60 {
                break;
            }
            lr *= 0.5;
        }
        history.push(loss);
    }
    Ok(RankerModel { weights: w, bias: b, threshold: hyper.threshold, standardizer, hyper, loss_history: history })
}

/// Featurizes every example and trains the classifier.
pub fn train_ranker(examples: &[LabeledExample], models: &FeatureModels, hyper: RankerHyperParams) -> Result<RankerModel> {
    let mut raw = Vec::with_capacity(examples.len());
    let mut labels = Vec::with_capacity(examples.len());
    for ex in examples {
        let retrieval = ex.retrieval_score.unwrap_or(0.0);
        raw.push(featurize(models, &ex.query, &ex.candidate, retrieval)?.to_array());
        labels.push(ex.label);
    }
    train_logistic(&raw, &labels, hyper)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub text: String,
    /// Standardized features the score was computed from.
    pub features: FeatureVector,
    pub score: f64,
    pub retrieval_score: f64,
    /// Position in the input candidate list.
    pub input_index: usize,
}

/// Descending score, then descending retrieval score, then input order.
pub fn rank_order(a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(b.retrieval_score.partial_cmp(&a.retrieval_score).unwrap_or(Ordering::Equal))
        .then(a.input_index.cmp(&b.input_index))
}

/// Scores and sorts every candidate without filtering.
pub fn score_candidates(
    model: &RankerModel,
    models: &FeatureModels,
    q: &str,
    candidates: &[(String, f64)],
) -> Vec<RankedCandidate> {
    let mut out = Vec::with_capacity(candidates.len());
    for (i, (text, retrieval)) in candidates.iter().enumerate() {
        // An empty query leaves nothing to rank against.
        let Ok(features) = model.featurize(models, q, text, *retrieval) else { return Vec::new() };
        out.push(RankedCandidate {
            text: text.clone(),
            features,
            score: model.score(&features),
            retrieval_score: *retrieval,
            input_index: i,
        });
    }
    out.sort_by(rank_order);
    out
}

/// Keeps candidates at or above `threshold`, sorted by [`rank_order`].
pub fn filter_and_sort(mut scored: Vec<RankedCandidate>, threshold: f64) -> Vec<RankedCandidate> {
    scored.retain(|c| c.score >= threshold);
    scored.sort_by(rank_order);
    scored
}

pub fn rank_candidates(
    model: &RankerModel,
    models: &FeatureModels,
    q: &str,
    candidates: &[(String, f64)],
) -> Vec<RankedCandidate> {
    filter_and_sort(score_candidates(model, models, q, candidates), model.threshold)
}

/// Precision and recall of the relevant class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// `None` when nothing was predicted relevant.
    pub precision: Option<f64>,
    pub recall: f64,
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
}

pub fn evaluate_predictions(predicted: &[bool], labels: &[u8]) -> Result<Evaluation> {
    if predicted.len() != labels.len() {
        return Err(Error::InvalidArgument("prediction and label counts differ".into()));
    }
    let (mut tp, mut fp, mut fneg, mut tn) = (0u64, 0u64, 0u64, 0u64);
    for (&p, &y) in predicted.iter().zip(labels) {
        match (p, y == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => tn += 1,
        }
    }
    if tp + fneg == 0 {
        return Err(Error::InsufficientData("evaluation needs at least one relevant example".into()));
    }
    let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
    Ok(Evaluation {
        precision,
        recall: tp as f64 / (tp + fneg) as f64,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fneg,
        true_negatives: tn,
    })
}

pub fn evaluate(model: &RankerModel, models: &FeatureModels, examples: &[LabeledExample]) -> Result<Evaluation> {
    let mut predicted = Vec::with_capacity(examples.len());
    let mut labels = Vec::with_capacity(examples.len());
    for ex in examples {
        let retrieval = ex.retrieval_score.unwrap_or(0.0);
        let fv = model.featurize(models, &ex.query, &ex.candidate, retrieval)?;
        predicted.push(model.predict(&fv));
        labels.push(ex.label);
    }
    evaluate_predictions(&predicted, &labels)
}
