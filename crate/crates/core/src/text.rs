//! Tokenization and first-sentence segmentation.
//!
//! Every other module counts words and matches terms through this one, so the
//! rules here are deliberately small and fully deterministic:
//!
//! * input is lowercased unconditionally;
//! * letter runs and digit runs become separate tokens;
//! * emoticons from a fixed list (`:)`, `:(`, `:D`, `;)`, `...`) stay whole;
//! * any other non-space character is a single punctuation token.
//!
//! Segmentation splits a text at the first sentence boundary, which is how
//! short heads and their continuations are mined from chat text.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub const DEFAULT_BOUNDARIES: &[&str] = &["...", ".", "?", "!", "。", "？", "！"];
pub const DEFAULT_EMOTICONS: &[&str] = &[":)", ":(", ":D", ";)", "..."];

/// Token sequence produced by [`tokenize`].
pub type TokenSeq = Vec<String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
    Emoticon,
}

impl TokenKind {
    pub fn is_word(self) -> bool {
        matches!(self, TokenKind::Word | TokenKind::Number)
    }
}

/// Where a text was split and by which boundary string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentBoundary {
    /// Character (not byte) offset of the boundary's first character.
    pub split_index: usize,
    pub delimiter: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub first: String,
    pub rest: String,
    pub boundary: SegmentBoundary,
}

/// Why [`TextConfig::split_first`] produced no segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitFailure {
    NoBoundary,
    EmptySide,
}

/// Boundary and emoticon lists. `Default` gives the built-in lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextConfig {
    pub boundaries: Vec<String>,
    pub emoticons: Vec<String>,
}

impl Default for TextConfig {
    fn default() -> Self {
        Self {
            boundaries: DEFAULT_BOUNDARIES.iter().map(|s| (*s).to_owned()).collect(),
            emoticons: DEFAULT_EMOTICONS.iter().map(|s| (*s).to_owned()).collect(),
        }
    }
}

impl TextConfig {
    pub fn tokenize(&self, text: &str) -> TokenSeq {
        let mut out = Vec::new();
        scan_tokens(text, &self.emoticons, |tok, _| out.push(tok.to_owned()));
        out
    }

    pub fn word_count(&self, text: &str) -> usize {
        let mut n = 0;
        scan_tokens(text, &self.emoticons, |_, kind| {
            if kind.is_word() {
                n += 1;
            }
        });
        n
    }

    pub fn segment_first(&self, text: &str) -> Option<Segment> {
        self.split_first(text).ok()
    }

    /// Like [`segment_first`](Self::segment_first) but reports why no split was made.
    pub fn split_first(&self, text: &str) -> Result<Segment, SplitFailure> {
        split_first_with(text, &self.boundaries, &self.emoticons)
    }
}

pub fn tokenize(text: &str) -> TokenSeq {
    let mut out = Vec::new();
    scan_tokens(text, DEFAULT_EMOTICONS, |tok, _| out.push(tok.to_owned()));
    out
}

/// Number of word and digit-run tokens; punctuation and emoticons do not count.
pub fn word_count(text: &str) -> usize {
    let mut n = 0;
    scan_tokens(text, DEFAULT_EMOTICONS, |_, kind| {
        if kind.is_word() {
            n += 1;
        }
    });
    n
}

pub fn segment_first(text: &str) -> Option<Segment> {
    split_first_with(text, DEFAULT_BOUNDARIES, DEFAULT_EMOTICONS).ok()
}

/// Length in bytes of the longest pattern matching `s` at its start,
/// comparing ASCII letters case-insensitively.
fn longest_prefix<S: AsRef<str>>(s: &str, patterns: &[S]) -> usize {
    let bytes = s.as_bytes();
    patterns
        .iter()
        .map(AsRef::as_ref)
        .filter(|p| {
            !p.is_empty()
                && bytes.len() >= p.len()
                && bytes[..p.len()].eq_ignore_ascii_case(p.as_bytes())
        })
        .map(str::len)
        .max()
        .unwrap_or(0)
}

fn scan_tokens<S: AsRef<str>>(text: &str, emoticons: &[S], mut emit: impl FnMut(&str, TokenKind)) {
    let lowered = text.to_lowercase();
    let s = lowered.as_str();
    let mut i = 0;
    while i < s.len() {
        let rest = &s[i..];
        let c = rest.chars().next().expect("non-empty remainder");
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let emo = longest_prefix(rest, emoticons);
        if emo > 0 {
            emit(&rest[..emo], TokenKind::Emoticon);
            i += emo;
            continue;
        }
        let (len, kind) = if c.is_alphabetic() {
            (run_len(rest, char::is_alphabetic), TokenKind::Word)
        } else if c.is_numeric() {
            (run_len(rest, char::is_numeric), TokenKind::Number)
        } else {
            (c.len_utf8(), TokenKind::Punct)
        };
        emit(&rest[..len], kind);
        i += len;
    }
}

fn run_len(s: &str, pred: fn(char) -> bool) -> usize {
    s.char_indices()
        .find(|&(_, c)| !pred(c))
        .map_or(s.len(), |(idx, _)| idx)
}

fn split_first_with<B: AsRef<str>, E: AsRef<str>>(
    text: &str,
    boundaries: &[B],
    emoticons: &[E],
) -> Result<Segment, SplitFailure> {
    let mut chars_seen = 0;
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        let b = longest_prefix(rest, boundaries);
        let e = longest_prefix(rest, emoticons);
        if e > b {
            // An emoticon that merely contains boundary characters is not a boundary.
            chars_seen += rest[..e].chars().count();
            i += e;
            continue;
        }
        if b > 0 {
            let first = text[..i].trim();
            let after = text[i + b..].trim();
            if first.is_empty() || after.is_empty() {
                return Err(SplitFailure::EmptySide);
            }
            return Ok(Segment {
                first: first.to_owned(),
                rest: after.to_owned(),
                boundary: SegmentBoundary {
                    split_index: chars_seen,
                    delimiter: text[i..i + b].to_owned(),
                },
            });
        }
        let c = rest.chars().next().expect("non-empty remainder");
        chars_seen += 1;
        i += c.len_utf8();
    }
    Err(SplitFailure::NoBoundary)
}
