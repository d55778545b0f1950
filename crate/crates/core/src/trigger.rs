//! Deciding whether a second response is appended at all.
//!
//! Only short first responses are eligible. Eligible turns trigger with
//! probability `base_prob + passivity_weight · passivity`, drawn from the
//! session's own seeded generator. Passivity is high when the user's recent
//! turns are short:
//!
//! ```text
//! passivity = 1 - min(1, mean word count of the last `window` user turns / 8)
//! ```
//!
//! and is 1 for a session with no user turns yet.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TextConfig;

/// Mean user-turn length at which passivity reaches zero.
pub const ACTIVE_TURN_WORDS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TriggerConfig {
    pub short_threshold: usize,
    pub base_prob: f64,
    pub passivity_weight: f64,
    pub passivity_window: usize,
    pub rng_seed: u64,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        Self { short_threshold: 5, base_prob: 0.5, passivity_weight: 0.4, passivity_window: 5, rng_seed: 0 }
    }
}

impl TriggerConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if self.short_threshold == 0 || self.passivity_window == 0 {
            return Err(Error::InvalidArgument("short_threshold and passivity_window must be at least 1".into()));
        }
        if !unit.contains(&self.base_prob) || !unit.contains(&self.passivity_weight) {
            return Err(Error::InvalidArgument("base_prob and passivity_weight must be in [0, 1]".into()));
        }
        if self.base_prob + self.passivity_weight > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument("base_prob + passivity_weight must not exceed 1".into()));
        }
        Ok(())
    }

    /// Trigger probability for an eligible turn at the given passivity.
    pub fn probability(&self, passivity: f64) -> f64 {
        (self.base_prob + self.passivity_weight * passivity).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    Bot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
    pub timestamp: u64,
}

/// One user's conversation: append-only turns plus the generator that drives
/// every random decision made for this user.
#[derive(Debug, Clone)]
pub struct ChatSession {
    session_id: String,
    turns: Vec<Turn>,
    rng: ChaCha8Rng,
}

impl ChatSession {
    pub fn new(session_id: impl Into<String>, seed: u64) -> Self {
        Self { session_id: session_id.into(), turns: Vec::new(), rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn last_timestamp(&self) -> Option<u64> {
        self.turns.last().map(|t| t.timestamp)
    }

    pub fn push_turn(&mut self, speaker: Speaker, text: impl Into<String>, timestamp: u64) -> Result<()> {
        if let Some(last) = self.last_timestamp() {
            if timestamp < last {
                return Err(Error::NonMonotonicTimestamp { last, got: timestamp });
            }
        }
        self.turns.push(Turn { speaker, text: text.into(), timestamp });
        Ok(())
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerDecision {
    pub triggered: bool,
    pub eligible: bool,
    pub probability_used: f64,
    pub passivity: f64,
}

pub fn passivity(session: &ChatSession, window: usize, text: &TextConfig) -> f64 {
    let counts: Vec<usize> = session
        .turns
        .iter()
        .rev()
        .filter(|t| t.speaker == Speaker::User)
        .take(window.max(1))
        .map(|t| text.word_count(&t.text))
        .collect();
    if counts.is_empty() {
        return 1.0;
    }
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    1.0 - (mean / ACTIVE_TURN_WORDS).min(1.0)
}

/// Gate plus Bernoulli draw. Advances the session generator exactly once when
/// the first response is eligible and never otherwise.
pub fn should_trigger(
    first_response: &str,
    session: &mut ChatSession,
    config: &TriggerConfig,
    text: &TextConfig,
) -> TriggerDecision {
    let passivity = passivity(session, config.passivity_window, text);
    if text.word_count(first_response) >= config.short_threshold {
        return TriggerDecision { triggered: false, eligible: false, probability_used: 0.0, passivity };
    }
    let p = config.probability(passivity);
    let u: f64 = session.rng.gen();
    TriggerDecision { triggered: u < p, eligible: true, probability_used: p, passivity }
}
