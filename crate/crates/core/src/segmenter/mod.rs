//! Reversible conversion between Polish text and the annotated sub-word
//! token stream.
//!
//! A word is a maximal run of alphanumeric characters. Capitalized words are
//! preceded by `_cap_`, fully uppercase words of two or more letters by
//! `_up_`; the word is then lowercased, stripped of listed prefixes and split
//! into syllable-like pieces (see [`syllable`]). Pieces of one word are linked
//! with `++`/`--` connectors. Every other non-space character becomes a
//! punctuation token, and line breaks become `_eol_`.
//!
//! Words with irregular casing (`iPhone`, `McDonald`) are cut into
//! case-uniform segments, each opened by its own marker, so the original
//! spelling is always recoverable.

mod layout;
pub mod syllable;
mod token;

use std::collections::BTreeSet;

use thiserror::Error;

pub use layout::{detokenize, detokenize_after, normalize, UNK_GLYPH};
pub use syllable::nucleus_count;
pub use token::{format_stream, parse_stream, Special, Token, SPACE_TOKEN};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentError {
    #[error("cannot syllabify an empty word")]
    EmptyWord,
    #[error("not a letter: {0:?}")]
    NotALetter(char),
    #[error("malformed token {0:?}")]
    BadToken(String),
    #[error("invalid segmenter configuration: {0}")]
    InvalidConfig(String),
}

/// Granularity of the token stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    SubWord,
    Char,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::SubWord => "subword",
            Mode::Char => "char",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = SegmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subword" | "sub-word" => Ok(Mode::SubWord),
            "char" => Ok(Mode::Char),
            other => Err(SegmentError::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

const SINGLE_CONSONANTS: &[&str] = &[
    "b", "c", "ć", "d", "f", "g", "h", "j", "k", "l", "ł", "m", "n", "ń", "p", "r", "s", "ś", "t",
    "w", "z", "ź", "ż", "ch", "cz", "dz", "dź", "dż", "rz", "sz",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmenterConfig {
    /// Tried in order; the first one that fits is stripped.
    pub prefixes: Vec<String>,
    pub legal_onsets: BTreeSet<String>,
    pub min_core_vowels: usize,
    pub mode: Mode,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        let mut legal_onsets = syllable::default_onsets();
        legal_onsets.extend(SINGLE_CONSONANTS.iter().map(|s| s.to_string()));
        SegmenterConfig {
            prefixes: syllable::default_prefixes(),
            legal_onsets,
            min_core_vowels: 2,
            mode: Mode::SubWord,
        }
    }
}

impl SegmenterConfig {
    pub fn with_mode(mode: Mode) -> Self {
        SegmenterConfig {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SegmentError> {
        if self.mode == Mode::SubWord && !self.prefixes.iter().any(|p| p == "nie") {
            return Err(SegmentError::InvalidConfig(
                "prefix list must contain \"nie\"".into(),
            ));
        }
        if let Some(p) = self.prefixes.iter().find(|p| {
            p.is_empty() || p.chars().any(|c| !c.is_alphabetic() || c.is_uppercase())
        }) {
            return Err(SegmentError::InvalidConfig(format!("bad prefix {p:?}")));
        }
        if let Some(c) = SINGLE_CONSONANTS
            .iter()
            .find(|c| !self.legal_onsets.contains(**c))
        {
            return Err(SegmentError::InvalidConfig(format!(
                "legal onsets must include the single consonant {c:?}"
            )));
        }
        Ok(())
    }
}

/// Returns the lowercase partner of a letter whose case maps back and forth
/// one-to-one; anything else is treated as uncased.
fn cased_upper(c: char) -> Option<char> {
    if !c.is_uppercase() {
        return None;
    }
    let mut lower = c.to_lowercase();
    let l = lower.next()?;
    if lower.next().is_some() {
        return None;
    }
    let mut upper = l.to_uppercase();
    (upper.next() == Some(c) && upper.next().is_none()).then_some(l)
}

fn lower_char(c: char) -> char {
    cased_upper(c).unwrap_or(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Marker {
    Up,
    Cap,
}

/// Cuts a word into case-uniform segments. Only the first segment can be
/// unmarked; each later one starts with a capital and carries a marker.
fn case_segments(word: &[char]) -> Vec<(Option<Marker>, &[char])> {
    let upper: Vec<bool> = word.iter().map(|&c| cased_upper(c).is_some()).collect();
    let run_end = |from: usize, want: bool| {
        (from..word.len())
            .find(|&k| upper[k] != want)
            .unwrap_or(word.len())
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < word.len() {
        if !upper[i] {
            let j = run_end(i, false);
            out.push((None, &word[i..j]));
            i = j;
            continue;
        }
        let j = run_end(i, true);
        if j - i >= 2 && j == word.len() {
            out.push((Some(Marker::Up), &word[i..j]));
            i = j;
        } else if j - i >= 2 {
            // the last capital opens a capitalized tail
            let head = &word[i..j - 1];
            let marker = if head.len() >= 2 { Marker::Up } else { Marker::Cap };
            out.push((Some(marker), head));
            let k = run_end(j, false);
            out.push((Some(Marker::Cap), &word[j - 1..k]));
            i = k;
        } else {
            let k = run_end(j, false);
            out.push((Some(Marker::Cap), &word[i..k]));
            i = k;
        }
    }
    out
}

/// A validated segmenter configuration with the operations built on it.
#[derive(Debug, Clone)]
pub struct Segmenter {
    cfg: SegmenterConfig,
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter {
            cfg: SegmenterConfig::default(),
        }
    }
}

impl Segmenter {
    pub fn new(cfg: SegmenterConfig) -> Result<Self, SegmentError> {
        cfg.validate()?;
        Ok(Segmenter { cfg })
    }

    pub fn with_mode(mode: Mode) -> Self {
        Segmenter {
            cfg: SegmenterConfig::with_mode(mode),
        }
    }

    pub fn config(&self) -> &SegmenterConfig {
        &self.cfg
    }

    pub fn mode(&self) -> Mode {
        self.cfg.mode
    }

    /// Splits a lowercase word into syllable-like pieces whose concatenation
    /// is the word. Words without a vowel come back whole.
    pub fn syllabify(&self, word: &str) -> Result<Vec<String>, SegmentError> {
        syllable::syllabify_with(word, &self.cfg.legal_onsets)
    }

    /// Strips up to two listed prefixes, each only if the remainder keeps at
    /// least `min_core_vowels` nuclei.
    pub fn stem_prefixes(&self, word: &str) -> (Vec<String>, String) {
        syllable::stem_prefixes_with(word, &self.cfg.prefixes, self.cfg.min_core_vowels)
    }

    fn letters_to_pieces(&self, letters: &str, out: &mut Vec<String>) {
        if self.cfg.mode == Mode::Char {
            out.extend(letters.chars().map(String::from));
            return;
        }
        let (prefixes, core) = self.stem_prefixes(letters);
        out.extend(prefixes);
        if !core.is_empty() {
            out.extend(self.syllabify(&core).expect("alphabetic run"));
        }
    }

    fn segment_pieces(&self, lower: &str) -> Vec<String> {
        let mut pieces = Vec::new();
        let mut chars = lower.char_indices().peekable();
        while let Some(&(start, c)) = chars.peek() {
            let alpha = c.is_alphabetic();
            let mut end = lower.len();
            while let Some(&(k, d)) = chars.peek() {
                if d.is_alphabetic() != alpha {
                    end = k;
                    break;
                }
                chars.next();
            }
            let run = &lower[start..end];
            if alpha {
                self.letters_to_pieces(run, &mut pieces);
            } else if self.cfg.mode == Mode::Char {
                pieces.extend(run.chars().map(String::from));
            } else {
                pieces.push(run.to_string());
            }
        }
        pieces
    }

    fn push_word(&self, word: &[char], out: &mut Vec<Token>) {
        let mut items: Vec<(Option<Marker>, String)> = Vec::new();
        for (marker, seg) in case_segments(word) {
            let lower: String = seg.iter().map(|&c| lower_char(c)).collect();
            for (k, piece) in self.segment_pieces(&lower).into_iter().enumerate() {
                items.push((if k == 0 { marker } else { None }, piece));
            }
        }
        let last = items.len().saturating_sub(1);
        for (k, (marker, surface)) in items.into_iter().enumerate() {
            match marker {
                Some(Marker::Up) => out.push(Token::UP),
                Some(Marker::Cap) => out.push(Token::CAP),
                None => {}
            }
            out.push(Token::Piece {
                surface,
                joins_prev: k > 0,
                joins_next: k < last,
            });
        }
    }

    /// Converts normalized text into tokens.
    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        let mut out = Vec::new();
        for (i, line) in text.split('\n').enumerate() {
            if i > 0 {
                out.push(Token::EOL);
            }
            let mut word: Vec<char> = Vec::new();
            for c in line.chars() {
                if c.is_alphanumeric() {
                    word.push(c);
                    continue;
                }
                if !word.is_empty() {
                    self.push_word(&word, &mut out);
                    word.clear();
                }
                if c.is_whitespace() {
                    if self.cfg.mode == Mode::Char {
                        out.push(Token::Space);
                    }
                } else {
                    out.push(Token::Punct(c));
                }
            }
            if !word.is_empty() {
                self.push_word(&word, &mut out);
            }
        }
        out
    }
}

/// Number of vowel nuclei across the words of one line.
///
/// Nuclei are counted per case-uniform segment, the same units the tokenizer
/// cuts words into, so a pre-vocalic `i` followed by a change of letter case
/// (`NIEbo`) counts as its own nucleus.
pub fn count_line_syllables(line: &str) -> usize {
    let chars: Vec<char> = line.chars().collect();
    chars
        .split(|c| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .flat_map(case_segments)
        .map(|(_, seg)| nucleus_count(&seg.iter().map(|&c| lower_char(c)).collect::<String>()))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        Segmenter::default()
            .tokenize(s)
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(toks("Litwo!"), ["_cap_", "li++", "--two", "!"]);
        assert_eq!(toks("a\nb"), ["a", "_eol_", "b"]);
        assert_eq!(toks("KSIĘGA"), ["_up_", "księ++", "--ga"]);
    }

    #[test]
    fn single_capital_uses_cap() {
        assert_eq!(toks("A"), ["_cap_", "a"]);
        assert_eq!(toks("W"), ["_cap_", "w"]);
    }

    #[test]
    fn syllabify_examples() {
        let s = Segmenter::default();
        assert_eq!(s.syllabify("moja").unwrap(), ["mo", "ja"]);
        assert_eq!(s.syllabify("w").unwrap(), ["w"]);
        assert_eq!(s.syllabify("ojczyzno").unwrap(), ["oj", "czy", "zno"]);
    }

    #[test]
    fn stem_examples() {
        let s = Segmenter::default();
        assert_eq!(s.stem_prefixes("niedobry"), (vec!["nie".to_string()], "dobry".to_string()));
        assert_eq!(s.stem_prefixes("kot"), (vec![], "kot".to_string()));
        assert_eq!(s.stem_prefixes("niebo"), (vec![], "niebo".to_string()));
    }

    #[test]
    fn prefix_becomes_its_own_piece() {
        assert_eq!(toks("niedobry"), ["nie++", "--do++", "--bry"]);
    }

    #[test]
    fn mixed_case_words_are_segmented() {
        assert_eq!(toks("McDonald"), ["_cap_", "mc++", "_cap_", "--do++", "--nald"]);
        assert_eq!(toks("ABc"), ["_cap_", "a++", "_cap_", "--bc"]);
        assert_eq!(toks("KSIĘGAx"), ["_up_", "księg++", "_cap_", "--ax"]);
        for w in ["McDonald", "ABc", "KSIĘGAx", "iPhone", "x1Y2", "ÉCOLE"] {
            assert_eq!(detokenize(&Segmenter::default().tokenize(w)), w);
        }
    }

    #[test]
    fn digits_stay_whole_in_subword_mode() {
        assert_eq!(toks("roku 1811"), ["ro++", "--ku", "1811"]);
        assert_eq!(toks("a1b"), ["a++", "--1++", "--b"]);
    }

    #[test]
    fn char_mode_tokens() {
        let s = Segmenter::with_mode(Mode::Char);
        let t: Vec<String> = s.tokenize("Ty, o").iter().map(ToString::to_string).collect();
        assert_eq!(t, ["_cap_", "t++", "--y", ",", "_sp_", "o"]);
        assert_eq!(detokenize(&s.tokenize("Ty, o")), "Ty, o");
    }

    #[test]
    fn quatrain_lines_have_thirteen_syllables() {
        for line in [
            "Litwo! Ojczyzno moja! ty jesteś jak zdrowie;",
            "Ile cię trzeba cenić, ten tylko się dowie",
            "Kto cię stracił. Dziś piękność twą w całej ozdobie",
            "Widzę i opisuję, bo tęsknię po tobie.",
        ] {
            assert_eq!(count_line_syllables(line), 13, "{line}");
        }
        assert_eq!(count_line_syllables(""), 0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SegmenterConfig::default();
        cfg.prefixes.retain(|p| p != "nie");
        assert!(Segmenter::new(cfg).is_err());
        let mut cfg = SegmenterConfig::default();
        cfg.legal_onsets.remove("k");
        assert!(Segmenter::new(cfg).is_err());
        assert!(Segmenter::new(SegmenterConfig::default()).is_ok());
    }
}
