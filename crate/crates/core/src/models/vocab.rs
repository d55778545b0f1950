use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub const UNK: &str = "<unk>";

/// Token ↔ id map whose id 0 is always the unknown token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    words: Vec<String>,
    ids: BTreeMap<String, u32>,
}

impl Vocab {
    /// Keeps tokens seen at least `min_count` times, ordered by first appearance.
    pub fn from_tokens<'a, I>(tokens: I, min_count: u64) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        let mut order: Vec<&str> = Vec::new();
        for t in tokens {
            let c = counts.entry(t).or_insert(0);
            if *c == 0 {
                order.push(t);
            }
            *c += 1;
        }
        Self::from_words(order.into_iter().filter(|t| counts[t] >= min_count).map(String::from))
    }

    pub fn from_words<I: IntoIterator<Item = String>>(words: I) -> Self {
        let mut v = Self { words: Vec::new(), ids: BTreeMap::new() };
        v.insert(String::from(UNK));
        for w in words {
            v.insert(w);
        }
        v
    }

    fn insert(&mut self, w: String) {
        if !self.ids.contains_key(&w) {
            self.ids.insert(w.clone(), self.words.len() as u32);
            self.words.push(w);
        }
    }

    /// Id of `token`, falling back to the unknown id.
    pub fn id(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(0)
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

impl From<Vec<String>> for Vocab {
    fn from(words: Vec<String>) -> Self {
        // Serialized form already starts with UNK; from_words keeps it at id 0.
        Self::from_words(words.into_iter().filter(|w| w != UNK))
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.words
    }
}
