//! Vocabulary construction, index encoding and fixed-length chunking.

use std::collections::HashMap;

use thiserror::Error;

use crate::segmenter::{SegmentError, Special, Token};

/// First line of the serialized vocabulary.
pub const VOCAB_HEADER: &str = "#sylgen-vocab v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("cannot build a vocabulary from an empty token sequence")]
    Empty,
    #[error("index {index} is outside the vocabulary of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("chunk length must be at least 2, got {0}")]
    ChunkTooShort(usize),
    #[error("malformed vocabulary: {0}")]
    Malformed(String),
    #[error(transparent)]
    Token(#[from] SegmentError),
}

/// Bijection between serialized tokens and dense indices.
///
/// The four special tokens always occupy indices 0..4 in the order
/// `_unk_`, `_eol_`, `_cap_`, `_up_`; corpus tokens follow in order of first
/// occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<Token>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub const UNK: usize = 0;

    fn with_specials() -> Self {
        let mut v = Vocab {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for s in Special::ALL {
            v.insert(Token::Special(s));
        }
        v
    }

    fn insert(&mut self, token: Token) -> usize {
        let key = token.to_string();
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.tokens.len();
        self.index.insert(key, i);
        self.tokens.push(token);
        i
    }

    pub fn build(tokens: &[Token]) -> Result<Self, CorpusError> {
        if tokens.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut v = Self::with_specials();
        for t in tokens {
            v.insert(t.clone());
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn unk_index(&self) -> usize {
        Self::UNK
    }

    pub fn get(&self, token: &Token) -> Option<usize> {
        self.index.get(&token.to_string()).copied()
    }

    pub fn token(&self, index: usize) -> Option<&Token> {
        self.tokens.get(index)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Unknown tokens map to `_unk_`.
    pub fn encode(&self, tokens: &[Token]) -> Vec<usize> {
        tokens
            .iter()
            .map(|t| self.get(t).unwrap_or(Self::UNK))
            .collect()
    }

    pub fn decode(&self, indices: &[usize]) -> Result<Vec<Token>, CorpusError> {
        indices
            .iter()
            .map(|&i| {
                self.tokens
                    .get(i)
                    .cloned()
                    .ok_or(CorpusError::IndexOutOfRange {
                        index: i,
                        size: self.len(),
                    })
            })
            .collect()
    }

    /// Line-oriented form: a header line, then one token per line where the
    /// line number (from zero, header excluded) is the index.
    pub fn to_text(&self) -> String {
        let mut out = String::from(VOCAB_HEADER);
        out.push('\n');
        for t in &self.tokens {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CorpusError> {
        let mut lines = text.lines();
        if lines.next() != Some(VOCAB_HEADER) {
            return Err(CorpusError::Malformed("missing or unknown header".into()));
        }
        let mut v = Vocab {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for line in lines {
            let t: Token = line.parse()?;
            let before = v.len();
            if v.insert(t) != before {
                return Err(CorpusError::Malformed(format!("duplicate entry {line:?}")));
            }
        }
        for (i, s) in Special::ALL.into_iter().enumerate() {
            if v.tokens.get(i) != Some(&Token::Special(s)) {
                return Err(CorpusError::Malformed(format!(
                    "special token {} not at index {i}",
                    s.as_str()
                )));
            }
        }
        Ok(v)
    }
}

/// One training example: `target[i]` is the token that follows `input[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPair {
    pub input: Vec<usize>,
    pub target: Vec<usize>,
}

impl ChunkPair {
    pub fn from_window(window: &[usize]) -> Self {
        ChunkPair {
            input: window[..window.len() - 1].to_vec(),
            target: window[1..].to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }
}

/// Cuts `indices` into `floor(N / len)` non-overlapping windows of `len`
/// tokens, dropping the remainder.
pub fn chunk(indices: &[usize], len: usize) -> Result<Vec<ChunkPair>, CorpusError> {
    if len < 2 {
        return Err(CorpusError::ChunkTooShort(len));
    }
    Ok(indices.chunks_exact(len).map(ChunkPair::from_window).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Token {
        Token::piece(s, false, false)
    }

    #[test]
    fn specials_plus_distinct() {
        let v = Vocab::build(&[p("a"), p("b"), p("a")]).unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(v.get(&p("a")), Some(4));
        assert_eq!(v.get(&p("b")), Some(5));
        assert_eq!(v.get(&Token::UNK), Some(0));
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(Vocab::build(&[]), Err(CorpusError::Empty));
    }

    #[test]
    fn unknown_maps_to_unk() {
        let v = Vocab::build(&[p("a")]).unwrap();
        assert_eq!(v.encode(&[p("zzz-not-in-vocab")]), vec![v.unk_index()]);
    }

    #[test]
    fn decode_bounds() {
        let v = Vocab::build(&[p("a")]).unwrap();
        assert_eq!(
            v.decode(&[v.len()]),
            Err(CorpusError::IndexOutOfRange { index: 5, size: 5 })
        );
        let seq = vec![p("a"), Token::EOL, p("a")];
        assert_eq!(v.decode(&v.encode(&seq)).unwrap(), seq);
    }

    #[test]
    fn text_form_roundtrip() {
        let v = Vocab::build(&[p("a"), Token::piece("li", false, true), Token::Punct('!'), Token::Space]).unwrap();
        let back = Vocab::from_text(&v.to_text()).unwrap();
        assert_eq!(back, v);
        assert!(Vocab::from_text("a\nb\n").is_err());
    }

    #[test]
    fn chunk_examples() {
        let idx: Vec<usize> = (0..400).collect();
        let c = chunk(&idx, 400).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].input.len(), 399);
        assert_eq!(c[0].target.len(), 399);
        assert_eq!(c[0].target[0], 1);
        assert!(chunk(&idx[..399], 400).unwrap().is_empty());
        assert_eq!(chunk(&vec![0; 79_544], 400).unwrap().len(), 198);
        assert_eq!(chunk(&idx, 1), Err(CorpusError::ChunkTooShort(1)));
    }
}
