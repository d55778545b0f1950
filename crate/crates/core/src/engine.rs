//! End-to-end reply pipeline.
//!
//! 1. The first response `r1` comes from a retrieval stub over query-response
//!    pairs keyed on the query.
//! 2. The trigger policy decides whether to try a second response.
//! 3. `r1` retrieves short responses from the improv index; their improv
//!    responses are ranked against the live query and sub-threshold ones
//!    dropped.
//! 4. One of the top `select_top_k` survivors is picked at random and joined
//!    after `r1`.
//!
//! Any failure to produce a second response degrades to replying with `r1`.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ImprovTriple, QueryResponsePair};
use crate::error::{Error, Result};
use crate::index::{build_index, Bm25Params, InvertedIndex};
use crate::ranker::{score_candidates, FeatureModels, RankedCandidate, RankerModel};
use crate::text::TextConfig;
use crate::trigger::{should_trigger, ChatSession, Speaker, TriggerConfig, TriggerDecision};

pub type QrIndex = InvertedIndex<QueryResponsePair>;
pub type ImprovIndex = InvertedIndex<ImprovTriple>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub top_n: usize,
    pub select_top_k: usize,
    /// First response used when the query matches nothing.
    pub fallback_response: String,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { top_n: 20, select_top_k: 3, fallback_response: "i see".into() }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_n == 0 || self.select_top_k == 0 {
            return Err(Error::InvalidArgument("top_n and select_top_k must be at least 1".into()));
        }
        if self.select_top_k > self.top_n {
            return Err(Error::InvalidArgument("select_top_k must not exceed top_n".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalResponse {
    pub reply: String,
    pub first_response: String,
    pub improv_response: Option<String>,
    pub trigger: TriggerDecision,
    /// Every scored candidate in rank order, present when a second response was attempted.
    pub debug: Option<Vec<RankedCandidate>>,
}

pub fn build_qr_index(pairs: Vec<QueryResponsePair>, params: Bm25Params, text: TextConfig) -> Result<QrIndex> {
    build_index(pairs.into_iter().map(|p| (p.query.clone(), p)), params, text)
}

pub fn build_improv_index(triples: Vec<ImprovTriple>, params: Bm25Params, text: TextConfig) -> Result<ImprovIndex> {
    build_index(triples.into_iter().map(|t| (t.short_response.clone(), t)), params, text)
}

/// Joins the two responses: a single space when `r1` already ends in a
/// boundary, otherwise `". "`.
pub fn join_responses(r1: &str, r2: &str, text: &TextConfig) -> String {
    let ends_with_boundary = text.boundaries.iter().any(|b| !b.is_empty() && r1.ends_with(b.as_str()));
    let joiner = if ends_with_boundary { " " } else { ". " };
    let mut out = String::with_capacity(r1.len() + joiner.len() + r2.len());
    out.push_str(r1);
    out.push_str(joiner);
    out.push_str(r2);
    out
}

/// Immutable pipeline state shared by every session.
#[derive(Debug, Clone)]
pub struct Engine {
    pub qr_index: QrIndex,
    pub improv_index: ImprovIndex,
    pub models: FeatureModels,
    pub ranker: RankerModel,
    pub config: EngineConfig,
    pub trigger: TriggerConfig,
    pub text: TextConfig,
}

impl Engine {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.trigger.validate()?;
        self.ranker.validate()
    }

    pub fn new_session(&self, session_id: impl Into<String>) -> ChatSession {
        ChatSession::new(session_id, self.trigger.rng_seed)
    }

    pub fn first_response(&self, q: &str) -> String {
        match self.qr_index.retrieve(q, 1).first() {
            Some(hit) => hit.doc.payload.response.clone(),
            None => self.config.fallback_response.clone(),
        }
    }

    /// Candidate improv responses for `r1`, deduplicated, with their BM25 scores.
    pub fn candidates(&self, r1: &str) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for hit in self.improv_index.retrieve(r1, self.config.top_n) {
            let improv = &hit.doc.payload.improv_response;
            if !out.iter().any(|(c, _)| c == improv) {
                out.push((improv.clone(), hit.score));
            }
        }
        out
    }

    /// Ranks candidates against `q` and picks one of the top survivors.
    ///
    /// Returns the chosen response (if any) and every scored candidate in rank
    /// order.
    pub fn second_response<R: Rng + ?Sized>(
        &self,
        q: &str,
        r1: &str,
        rng: &mut R,
    ) -> (Option<String>, Vec<RankedCandidate>) {
        let candidates = self.candidates(r1);
        let scored = score_candidates(&self.ranker, &self.models, q, &candidates);
        let survivors = scored.iter().take_while(|c| c.score >= self.ranker.threshold).count();
        // `scored` is sorted, so survivors form a prefix.
        debug_assert!(scored[survivors..].iter().all(|c| c.score < self.ranker.threshold));
        if survivors == 0 {
            return (None, scored);
        }
        let k = self.config.select_top_k.min(survivors);
        let pick = rng.gen_range(0..k);
        (Some(scored[pick].text.clone()), scored)
    }

    /// Handles one user message: records it, composes the reply, records that.
    pub fn respond(&self, session: &mut ChatSession, message: &str, timestamp: u64) -> Result<FinalResponse> {
        let message = message.trim();
        if message.is_empty() {
            return Err(Error::InvalidArgument("message is empty".into()));
        }
        session.push_turn(Speaker::User, message, timestamp)?;
        let r1 = self.first_response(message);
        let decision = should_trigger(&r1, session, &self.trigger, &self.text);
        let (improv, debug) = if decision.triggered {
            let (r2, scored) = self.second_response(message, &r1, session.rng_mut());
            (r2, Some(scored))
        } else {
            (None, None)
        };
        let reply = match &improv {
            Some(r2) => join_responses(&r1, r2, &self.text),
            None => r1.clone(),
        };
        session.push_turn(Speaker::Bot, reply.clone(), timestamp)?;
        Ok(FinalResponse { reply, first_response: r1, improv_response: improv, trigger: decision, debug })
    }
}
