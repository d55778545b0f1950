//! Mining improv triples from query-response pairs and standalone sentences.
//!
//! A response (or chat sentence) is split at its first boundary. When the head
//! has fewer than `short_threshold` words it becomes the short response and
//! the remainder becomes the improv response appended after it.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::text::{SplitFailure, TextConfig};

pub const DEFAULT_SHORT_THRESHOLD: usize = 5;
pub const MAX_IMPROV_TOKENS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResponsePair {
    pub query: String,
    pub response: String,
}

impl QueryResponsePair {
    pub fn new(query: impl Into<String>, response: impl Into<String>) -> Self {
        Self { query: query.into(), response: response.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "pair")]
    FromPair,
    #[serde(rename = "sentence")]
    FromSentence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovTriple {
    #[serde(rename = "short")]
    pub short_response: String,
    #[serde(rename = "improv")]
    pub improv_response: String,
    #[serde(rename = "context")]
    pub context_query: Option<String>,
    pub source: Source,
}

/// Counters for one extraction run.
///
/// `records_read` always equals `triples_emitted` plus every rejection counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionStats {
    pub records_read: u64,
    pub triples_emitted: u64,
    pub rejected_no_boundary: u64,
    pub rejected_too_long: u64,
    pub rejected_empty: u64,
    pub rejected_duplicate: u64,
    pub malformed: u64,
}

impl ExtractionStats {
    pub fn rejections(&self) -> u64 {
        self.rejected_no_boundary
            + self.rejected_too_long
            + self.rejected_empty
            + self.rejected_duplicate
            + self.malformed
    }

    pub fn is_balanced(&self) -> bool {
        self.records_read == self.triples_emitted + self.rejections()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    NoBoundary,
    TooLong,
    Empty,
}

/// Extraction settings: segmentation lists plus the short-head threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extractor {
    pub text: TextConfig,
    pub short_threshold: usize,
}

impl Default for Extractor {
    fn default() -> Self {
        Self { text: TextConfig::default(), short_threshold: DEFAULT_SHORT_THRESHOLD }
    }
}

impl Extractor {
    pub fn new(text: TextConfig, short_threshold: usize) -> Self {
        assert!(short_threshold >= 1, "short_threshold must be at least 1");
        Self { text, short_threshold }
    }

    pub fn classify_pair(&self, pair: &QueryResponsePair) -> Result<ImprovTriple, Rejection> {
        let query = pair.query.trim();
        if query.is_empty() || pair.response.trim().is_empty() {
            return Err(Rejection::Empty);
        }
        let (short, improv) = self.split(&pair.response)?;
        Ok(ImprovTriple {
            short_response: short,
            improv_response: improv,
            context_query: Some(query.into()),
            source: Source::FromPair,
        })
    }

    pub fn classify_sentence(&self, sentence: &str) -> Result<ImprovTriple, Rejection> {
        if sentence.trim().is_empty() {
            return Err(Rejection::Empty);
        }
        let (short, improv) = self.split(sentence)?;
        Ok(ImprovTriple {
            short_response: short,
            improv_response: improv,
            context_query: None,
            source: Source::FromSentence,
        })
    }

    pub fn extract_from_pair(&self, pair: &QueryResponsePair) -> Option<ImprovTriple> {
        self.classify_pair(pair).ok()
    }

    pub fn extract_from_sentence(&self, sentence: &str) -> Option<ImprovTriple> {
        self.classify_sentence(sentence).ok()
    }

    fn split(&self, text: &str) -> Result<(String, String), Rejection> {
        let seg = self.text.split_first(text).map_err(|f| match f {
            SplitFailure::NoBoundary => Rejection::NoBoundary,
            SplitFailure::EmptySide => Rejection::Empty,
        })?;
        if self.text.word_count(&seg.first) >= self.short_threshold {
            return Err(Rejection::TooLong);
        }
        if self.text.tokenize(&seg.rest).len() > MAX_IMPROV_TOKENS {
            return Err(Rejection::TooLong);
        }
        Ok((seg.first, seg.rest))
    }
}

pub fn extract_from_pair(pair: &QueryResponsePair, short_threshold: usize) -> Option<ImprovTriple> {
    Extractor::new(TextConfig::default(), short_threshold).extract_from_pair(pair)
}

pub fn extract_from_sentence(sentence: &str, short_threshold: usize) -> Option<ImprovTriple> {
    Extractor::new(TextConfig::default(), short_threshold).extract_from_sentence(sentence)
}

/// Streaming accumulator for a whole extraction run.
///
/// Feed pair records, then sentence records, then call [`finish`](Self::finish).
/// Records that failed to parse upstream are reported with
/// [`malformed`](Self::malformed). Output keeps input order; later duplicates
/// of `(short, improv)` (compared case-insensitively) are dropped.
#[derive(Debug)]
pub struct ExtractionRun<'a> {
    extractor: &'a Extractor,
    seen: BTreeSet<(String, String)>,
    triples: Vec<ImprovTriple>,
    stats: ExtractionStats,
}

impl<'a> ExtractionRun<'a> {
    pub fn new(extractor: &'a Extractor) -> Self {
        Self { extractor, seen: BTreeSet::new(), triples: Vec::new(), stats: ExtractionStats::default() }
    }

    pub fn pair(&mut self, pair: &QueryResponsePair) {
        let result = self.extractor.classify_pair(pair);
        self.record(result);
    }

    pub fn sentence(&mut self, sentence: &str) {
        let result = self.extractor.classify_sentence(sentence);
        self.record(result);
    }

    pub fn malformed(&mut self) {
        self.stats.records_read += 1;
        self.stats.malformed += 1;
    }

    pub fn stats(&self) -> &ExtractionStats {
        &self.stats
    }

    pub fn finish(self) -> (Vec<ImprovTriple>, ExtractionStats) {
        debug_assert!(self.stats.is_balanced());
        (self.triples, self.stats)
    }

    fn record(&mut self, result: Result<ImprovTriple, Rejection>) {
        self.stats.records_read += 1;
        match result {
            Ok(triple) => {
                let key = (triple.short_response.to_lowercase(), triple.improv_response.to_lowercase());
                if self.seen.insert(key) {
                    self.stats.triples_emitted += 1;
                    self.triples.push(triple);
                } else {
                    self.stats.rejected_duplicate += 1;
                }
            }
            Err(Rejection::NoBoundary) => self.stats.rejected_no_boundary += 1,
            Err(Rejection::TooLong) => self.stats.rejected_too_long += 1,
            Err(Rejection::Empty) => self.stats.rejected_empty += 1,
        }
    }
}

/// Runs extraction over in-memory record lists.
pub fn run_extraction(
    extractor: &Extractor,
    pairs: &[QueryResponsePair],
    sentences: &[String],
) -> (Vec<ImprovTriple>, ExtractionStats) {
    let mut run = ExtractionRun::new(extractor);
    for p in pairs {
        run.pair(p);
    }
    for s in sentences {
        run.sentence(s);
    }
    run.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn pair_examples() {
        let t = extract_from_pair(&QueryResponsePair::new("do you like cats", "yes. they are my world"), 5)
            .unwrap();
        assert_eq!(t.short_response, "yes");
        assert_eq!(t.improv_response, "they are my world");
        assert_eq!(t.context_query.as_deref(), Some("do you like cats"));
        assert_eq!(t.source, Source::FromPair);

        assert_eq!(extract_from_pair(&QueryResponsePair::new("q", "hello there friend"), 5), None);
        assert_eq!(extract_from_pair(&QueryResponsePair::new("q", "one two three four five. rest"), 5), None);
        assert!(extract_from_pair(&QueryResponsePair::new("q", "one two three four. rest"), 5).is_some());
    }

    #[test]
    fn sentence_examples() {
        let t = extract_from_sentence("a bit sad ... but everything is gonna all right :)", 5).unwrap();
        assert_eq!(t.short_response, "a bit sad");
        assert_eq!(t.improv_response, "but everything is gonna all right :)");
        assert_eq!(t.context_query, None);
        assert_eq!(t.source, Source::FromSentence);

        assert_eq!(extract_from_sentence("ok", 5), None);
        assert_eq!(extract_from_sentence("? leading boundary", 5), None);
    }

    #[test]
    fn only_first_boundary_splits() {
        let t = extract_from_sentence("sure! i can. see you?", 5).unwrap();
        assert_eq!(t.short_response, "sure");
        assert_eq!(t.improv_response, "i can. see you?");
    }

    #[test]
    fn overlong_improv_is_rejected() {
        let tail: Vec<String> = (0..201).map(|i| format!("w{i}")).collect();
        let text = format!("ok. {}", tail.join(" "));
        // "w0" tokenizes as ["w", "0"], so this is well over the limit.
        let ex = Extractor::default();
        assert_eq!(ex.classify_sentence(&text), Err(Rejection::TooLong));
    }

    #[test]
    fn run_classifies_and_dedups() {
        let ex = Extractor::default();
        let pairs = [
            QueryResponsePair::new("do you like cats", "yes. they are my world"),
            QueryResponsePair::new("really", "YES. They are my world"),
            QueryResponsePair::new("", "ok. fine"),
            QueryResponsePair::new("q", "no boundary here"),
            QueryResponsePair::new("q", "far too many words in this head. tail"),
        ];
        let sentences = ["a bit sad ... but everything is gonna all right :)".to_string()];
        let (triples, stats) = run_extraction(&ex, &pairs, &sentences);
        assert_eq!(triples.len(), 2);
        assert_eq!(triples[0].context_query.as_deref(), Some("do you like cats"));
        assert_eq!(triples[1].source, Source::FromSentence);
        assert_eq!(
            stats,
            ExtractionStats {
                records_read: 6,
                triples_emitted: 2,
                rejected_no_boundary: 1,
                rejected_too_long: 1,
                rejected_empty: 1,
                rejected_duplicate: 1,
                malformed: 0,
            }
        );
    }

    #[test]
    fn empty_run() {
        let (t, s) = run_extraction(&Extractor::default(), &[], &[]);
        assert!(t.is_empty());
        assert_eq!(s, ExtractionStats::default());
    }

    #[test]
    fn synthetic_forty_percent() {
        // Every tenth block of records: 4 with a 2-word head and a boundary, 6 without.
        let mut sentences = Vec::new();
        for i in 0..1000 {
            if i % 10 < 4 {
                sentences.push(format!("good word. tail number {i}"));
            } else {
                sentences.push(format!("plain record {i} without split"));
            }
        }
        let (triples, stats) = run_extraction(&Extractor::default(), &[], &sentences);
        assert_eq!(stats.triples_emitted, 400);
        assert_eq!(triples.len(), 400);
        assert_eq!(stats.rejected_no_boundary, 600);
    }

    proptest! {
        #[test]
        fn emitted_triples_satisfy_invariants(
            query in "[a-z ]{0,12}",
            response in "[a-z .?!]{0,60}",
            threshold in 1usize..8,
        ) {
            let ex = Extractor::new(TextConfig::default(), threshold);
            let pair = QueryResponsePair::new(query, response.clone());
            if let Some(t) = ex.extract_from_pair(&pair) {
                prop_assert!(ex.text.word_count(&t.short_response) < threshold);
                prop_assert!(!t.improv_response.is_empty());
                prop_assert!(t.context_query.is_some());
                prop_assert_eq!(t.source, Source::FromPair);
            }
            if let Some(t) = ex.extract_from_sentence(&response) {
                prop_assert!(ex.text.word_count(&t.short_response) < threshold);
                prop_assert!(!t.improv_response.is_empty());
                prop_assert!(t.context_query.is_none());
            }
        }

        #[test]
        fn stats_always_balance(sentences in proptest::collection::vec("[a-z .!]{0,30}", 0..40)) {
            let (triples, stats) = run_extraction(&Extractor::default(), &[], &sentences);
            prop_assert!(stats.is_balanced());
            prop_assert_eq!(triples.len() as u64, stats.triples_emitted);
        }
    }
}
