//! Vocabulary: an ordered bijection between word tokens and dense indices.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Canonical token form: trimmed, lowercased, internal whitespace runs
/// collapsed to a single space. Multi-word tokens stay multi-word.
pub fn normalize_token(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Ordered set of unique tokens with O(1) token -> index lookup.
///
/// Index order is the order tokens were first seen, which keeps every
/// matrix layout derived from a vocabulary deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Build from an ordered token list. Tokens are normalized first;
    /// duplicates (after normalization) and empty vocabularies are rejected.
    pub fn new<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vocab = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for raw in tokens {
            let token = normalize_token(raw.as_ref());
            if token.is_empty() {
                return Err(Error::EmptyInput("blank token".to_string()));
            }
            if vocab.index.contains_key(&token) {
                return Err(Error::DuplicateToken(token));
            }
            vocab.push(token);
        }
        if vocab.tokens.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(vocab)
    }

    /// Incremental builder used by parsers: returns the existing index of
    /// `raw` or appends it in first-appearance order.
    pub(crate) fn empty() -> Self {
        Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub(crate) fn intern(&mut self, raw: &str) -> Option<u32> {
        let token = normalize_token(raw);
        if token.is_empty() {
            return None;
        }
        match self.index.get(&token) {
            Some(&i) => Some(i),
            None => Some(self.push(token)),
        }
    }

    fn push(&mut self, token: String) -> u32 {
        let i = self.tokens.len() as u32;
        self.index.insert(token.clone(), i);
        self.tokens.push(token);
        i
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, index: u32) -> &str {
        &self.tokens[index as usize]
    }

    /// Index of a token, normalizing the query first.
    pub fn index_of(&self, raw: &str) -> Option<u32> {
        self.index.get(&normalize_token(raw)).copied()
    }

    pub fn contains(&self, raw: &str) -> bool {
        self.index_of(raw).is_some()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (i as u32, t.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_case_and_whitespace() {
        assert_eq!(normalize_token("  Banjo "), "banjo");
        assert_eq!(normalize_token("ICE\tCREAM"), "ice cream");
        assert_eq!(normalize_token("ice   cream"), "ice cream");
    }

    #[test]
    fn bijection_holds() {
        let v = Vocabulary::new(["Mice", "cheese", "Ice Cream"]).unwrap();
        assert_eq!(v.len(), 3);
        for (i, t) in v.iter() {
            assert_eq!(v.index_of(t), Some(i));
        }
        assert_eq!(v.token(2), "ice cream");
        assert_eq!(v.index_of("  ICE  cream "), Some(2));
    }

    #[test]
    fn duplicate_after_normalization_rejected() {
        let err = Vocabulary::new(["cat", "CAT"]).unwrap_err();
        assert!(matches!(err, Error::DuplicateToken(t) if t == "cat"));
    }

    #[test]
    fn empty_rejected() {
        let err = Vocabulary::new(Vec::<&str>::new()).unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary));
    }
}
