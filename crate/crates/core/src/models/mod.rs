//! The three feature models scored for every (query, candidate) pair:
//! an IBM Model 1 translation table, an interpolated trigram language model
//! and a mean-pooled dual encoder.

pub mod ibm1;
pub mod lm;
pub mod matcher;
pub mod vocab;

pub use ibm1::{tm_score, train_ibm1, TranslationTable, NULL_TOKEN};
pub use lm::{lm_score, train_lm, Lambdas, TrigramLm};
pub use matcher::{init_matcher, match_score, train_matcher, DualEncoder, MatcherHyperParams};
pub use vocab::Vocab;

/// Small floor inside logarithms so unseen events stay finite.
pub const LOG_FLOOR: f64 = 1e-12;
