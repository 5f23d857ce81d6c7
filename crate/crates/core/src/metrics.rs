//! Evaluation: bad-words ratio, metre conformance, sequence compression and
//! sampling entropy, plus the plain-text report format.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::Vocab;
use crate::nnet::ModelParams;
use crate::sampler::{generate_from_tokens, DecodeMode, GenerationConfig, SampleError, DEFAULT_PRIME};
use crate::segmenter::{
    count_line_syllables, Mode, Segmenter, SegmenterConfig, Special, Token,
};

/// Syllables per line of the alexandrine.
pub const ALEXANDRINE: usize = 13;

pub const REPORT_HEADER: &str = "# sylgen metrics report v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cannot compute a compression ratio of empty text")]
    EmptyText,
    #[error("text produced no sub-word tokens")]
    NoTokens,
    #[error("invalid segmenter configuration: {0}")]
    Config(String),
}

/// Lowercased whole words seen in a training text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    words: HashSet<String>,
}

impl Lexicon {
    pub fn from_text(text: &str) -> Self {
        let words = text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(|w| w.to_lowercase())
            .collect();
        Lexicon { words }
    }

    /// Words assembled from the well-formed runs of a token stream.
    pub fn from_tokens(tokens: &[Token]) -> Self {
        let mut words = HashSet::new();
        for run in runs(tokens) {
            if run.well_formed {
                words.insert(run.text);
            }
        }
        Lexicon { words }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug)]
struct Run {
    text: String,
    pieces: usize,
    well_formed: bool,
}

/// Groups pieces into maximal connector-joined runs. Case markers do not
/// interrupt a run; any other non-piece token ends it.
fn runs(tokens: &[Token]) -> Vec<Run> {
    let mut out = Vec::new();
    let mut cur: Option<Run> = None;
    let mut open = false;
    let close = |cur: &mut Option<Run>, open: bool, out: &mut Vec<Run>| {
        if let Some(mut r) = cur.take() {
            if open {
                r.well_formed = false;
            }
            out.push(r);
        }
    };
    for t in tokens {
        match t {
            Token::Piece {
                surface,
                joins_prev,
                joins_next,
            } => {
                let continues = open && *joins_prev;
                if !continues {
                    close(&mut cur, open, &mut out);
                    cur = Some(Run {
                        text: String::new(),
                        pieces: 0,
                        well_formed: !joins_prev,
                    });
                }
                let r = cur.as_mut().expect("run started");
                r.text.push_str(surface);
                r.pieces += 1;
                open = *joins_next;
            }
            Token::Special(Special::Cap | Special::Up) => {}
            _ => {
                close(&mut cur, open, &mut out);
                open = false;
            }
        }
    }
    close(&mut cur, open, &mut out);
    out
}

/// Fraction of pieces that belong to runs which are ill-formed or not in the
/// lexicon. Zero when there are no pieces.
pub fn bad_words_ratio(tokens: &[Token], lexicon: &Lexicon) -> f64 {
    let (mut bad, mut total) = (0usize, 0usize);
    for r in runs(tokens) {
        total += r.pieces;
        if !r.well_formed || !lexicon.contains(&r.text) {
            bad += r.pieces;
        }
    }
    if total == 0 {
        0.0
    } else {
        bad as f64 / total as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetreStats {
    /// Syllable count → number of lines.
    pub histogram: BTreeMap<usize, usize>,
    pub lines: usize,
    pub alexandrine_rate: f64,
}

/// Syllable histogram over the non-empty lines of `text`.
pub fn metre_stats(text: &str) -> MetreStats {
    let mut s = MetreStats::default();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        *s.histogram.entry(count_line_syllables(line)).or_insert(0) += 1;
        s.lines += 1;
    }
    if s.lines > 0 {
        let hits = s.histogram.get(&ALEXANDRINE).copied().unwrap_or(0);
        s.alexandrine_rate = hits as f64 / s.lines as f64;
    }
    s
}

/// Character-mode token count over sub-word token count for the same text.
pub fn compression_ratio(text: &str, cfg: &SegmenterConfig) -> Result<f64, MetricsError> {
    if text.is_empty() {
        return Err(MetricsError::EmptyText);
    }
    let with = |mode| {
        Segmenter::new(SegmenterConfig {
            mode,
            ..cfg.clone()
        })
        .map_err(|e| MetricsError::Config(e.to_string()))
    };
    let chars = with(Mode::Char)?.tokenize(text).len();
    let sub = with(Mode::SubWord)?.tokenize(text).len();
    if sub == 0 {
        return Err(MetricsError::NoTokens);
    }
    Ok(chars as f64 / sub as f64)
}

/// Mean of per-step entropies; zero for an empty run.
pub fn mean_step_entropy(entropies: &[f64]) -> f64 {
    if entropies.is_empty() {
        0.0
    } else {
        entropies.iter().sum::<f64>() / entropies.len() as f64
    }
}

/// Fixed evaluation sample used to track the bad-words ratio during
/// training.
#[derive(Debug, Clone)]
pub struct BadWordsProbe {
    prime: Vec<Token>,
    lexicon: Lexicon,
    cfg: GenerationConfig,
}

impl BadWordsProbe {
    pub const TOKENS: usize = 2000;
    pub const SEED: u64 = 0x00BA_D0_0D;
    pub const TEMPERATURE: f64 = 0.8;

    pub fn new(segmenter: &Segmenter, lexicon: Lexicon) -> Self {
        Self::with_length(segmenter, lexicon, Self::TOKENS)
    }

    pub fn with_length(segmenter: &Segmenter, lexicon: Lexicon, length: usize) -> Self {
        BadWordsProbe {
            prime: segmenter.tokenize(DEFAULT_PRIME),
            lexicon,
            cfg: GenerationConfig {
                prime: DEFAULT_PRIME.to_string(),
                length,
                temperature: Self::TEMPERATURE,
                seed: Self::SEED,
                mode: DecodeMode::Sample,
            },
        }
    }

    pub fn measure(&self, params: &ModelParams<f32>, vocab: &Vocab) -> Result<f64, SampleError> {
        let (tokens, _) = generate_from_tokens(params, vocab, &self.prime, &self.cfg)?;
        Ok(bad_words_ratio(&tokens, &self.lexicon))
    }
}

/// Everything reported for one trained model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub label: String,
    pub initial_loss: f64,
    pub loss_series: Vec<f64>,
    pub bad_words_series: Vec<f64>,
    pub metre: MetreStats,
    pub compression_ratio: Option<f64>,
    /// Temperature → mean entropy in nats, in ascending temperature order.
    pub entropy_by_temperature: Vec<(f64, f64)>,
}

fn join(xs: impl IntoIterator<Item = String>) -> String {
    xs.into_iter().collect::<Vec<_>>().join(",")
}

impl MetricsReport {
    pub fn final_loss(&self) -> Option<f64> {
        self.loss_series.last().copied()
    }

    /// Key/value lines, `prefix` prepended to every key.
    pub fn key_values(&self, prefix: &str) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{prefix}{k}={v}");
        };
        kv("label", self.label.clone());
        kv("initial_loss", format!("{:.6}", self.initial_loss));
        kv(
            "final_loss",
            self.final_loss().map_or("na".into(), |v| format!("{v:.6}")),
        );
        kv("epochs", self.loss_series.len().to_string());
        kv("loss_series", join(self.loss_series.iter().map(|v| format!("{v:.6}"))));
        kv(
            "bad_words_series",
            join(self.bad_words_series.iter().map(|v| format!("{v:.6}"))),
        );
        kv(
            "final_bad_words",
            self.bad_words_series
                .last()
                .map_or("na".into(), |v| format!("{v:.6}")),
        );
        kv("metre_lines", self.metre.lines.to_string());
        kv(
            "metre_histogram",
            join(self.metre.histogram.iter().map(|(k, v)| format!("{k}:{v}"))),
        );
        kv("alexandrine_rate", format!("{:.6}", self.metre.alexandrine_rate));
        kv(
            "compression_ratio",
            self.compression_ratio
                .map_or("na".into(), |v| format!("{v:.6}")),
        );
        kv(
            "entropy_by_temperature",
            join(
                self.entropy_by_temperature
                    .iter()
                    .map(|(t, h)| format!("{t}:{h:.6}")),
            ),
        );
        s
    }

    /// Human-readable section followed by a `[values]` block of key/value
    /// pairs.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{REPORT_HEADER}");
        let _ = writeln!(s, "model: {}", self.label);
        let _ = writeln!(s, "untrained loss: {:.4}", self.initial_loss);
        let _ = writeln!(s, "epoch  loss      bad-words");
        for (i, l) in self.loss_series.iter().enumerate() {
            let bw = self
                .bad_words_series
                .get(i)
                .map_or("-".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(s, "{:>5}  {l:<8.4}  {bw}", i + 1);
        }
        let _ = writeln!(
            s,
            "metre: {} lines, alexandrine rate {:.4}",
            self.metre.lines, self.metre.alexandrine_rate
        );
        for (k, v) in &self.metre.histogram {
            let _ = writeln!(s, "  {k:>3} syllables: {v}");
        }
        if let Some(c) = self.compression_ratio {
            let _ = writeln!(s, "compression ratio: {c:.4}");
        }
        for (t, h) in &self.entropy_by_temperature {
            let _ = writeln!(s, "mean entropy at T={t}: {h:.4} nats");
        }
        s.push_str("[values]\n");
        s.push_str(&self.key_values(""));
        s
    }
}

/// Two-column `epoch value` lines, epochs counted from 1.
pub fn series_file(values: &[f64]) -> String {
    let mut s = String::from("# epoch value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{} {v:.6}", i + 1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, prev: bool, next: bool) -> Token {
        Token::piece(s, prev, next)
    }

    #[test]
    fn clean_runs_score_zero() {
        let lex = Lexicon::from_text("Litwo ojczyzno moja");
        let t = [
            Token::CAP,
            p("li", false, true),
            p("two", true, false),
            Token::Punct('!'),
            p("mo", false, true),
            p("ja", true, false),
        ];
        assert_eq!(bad_words_ratio(&t, &lex), 0.0);
    }

    #[test]
    fn one_broken_run_of_three_in_ten() {
        let lex = Lexicon::from_text("kot pies");
        let mut t = vec![p("kot", false, false); 7];
        t.push(p("a", false, true));
        t.push(p("b", true, true));
        t.push(p("c", true, true));
        assert!((bad_words_ratio(&t, &lex) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn out_of_lexicon_and_dangling() {
        let lex = Lexicon::from_text("litwo");
        assert_eq!(bad_words_ratio(&[p("kot", false, false)], &lex), 1.0);
        assert_eq!(bad_words_ratio(&[p("two", true, false)], &lex), 1.0);
        assert_eq!(bad_words_ratio(&[Token::EOL, Token::Punct(',')], &lex), 0.0);
        let t = [p("li", false, true), Token::CAP, p("two", true, false)];
        assert_eq!(bad_words_ratio(&t, &lex), 0.0);
    }

    #[test]
    fn lexicon_from_tokens_matches_text() {
        let seg = Segmenter::default();
        let text = "Nieboga McDonald i Litwo, niedobry";
        let a = Lexicon::from_tokens(&seg.tokenize(text));
        assert_eq!(a, Lexicon::from_text(text));
    }

    #[test]
    fn metre_cases() {
        let q = "Litwo! Ojczyzno moja! ty jesteś jak zdrowie;\n\
                 Ile cię trzeba cenić, ten tylko się dowie,\n\
                 Kto cię stracił. Dziś piękność twą w całej ozdobie\n\
                 Widzę i opisuję, bo tęsknię po tobie.\n";
        let s = metre_stats(q);
        assert_eq!(s.lines, 4);
        assert_eq!(s.alexandrine_rate, 1.0);
        assert_eq!(metre_stats(""), MetreStats::default());
        let one = metre_stats("Litwo! Ojczyzno moja! ty jesteś jak zdrowie;");
        assert_eq!(one.histogram, BTreeMap::from([(13, 1)]));
    }

    #[test]
    fn compression_cases() {
        let cfg = SegmenterConfig::default();
        assert_eq!(compression_ratio("kot", &cfg).unwrap(), 3.0);
        assert_eq!(compression_ratio("\n\n", &cfg).unwrap(), 1.0);
        assert_eq!(compression_ratio("", &cfg), Err(MetricsError::EmptyText));
        assert!(compression_ratio("ab", &cfg).unwrap() > 1.0);
    }

    #[test]
    fn entropy_mean() {
        assert_eq!(mean_step_entropy(&[]), 0.0);
        assert_eq!(mean_step_entropy(&[1.0, 2.0]), 1.5);
    }

    #[test]
    fn report_text_has_values_block() {
        let r = MetricsReport {
            label: "subword".into(),
            initial_loss: 8.5,
            loss_series: vec![3.0, 2.0],
            bad_words_series: vec![0.3, 0.1],
            metre: metre_stats("a\n"),
            compression_ratio: Some(3.1),
            entropy_by_temperature: vec![(0.2, 0.1), (0.8, 1.0)],
        };
        let t = r.to_text();
        assert!(t.starts_with(REPORT_HEADER));
        assert!(t.contains("[values]\nlabel=subword\n"));
        assert!(t.contains("final_loss=2.000000\n"));
        assert!(t.contains("entropy_by_temperature=0.2:0.100000,0.8:1.000000\n"));
        assert_eq!(series_file(&[0.5]), "# epoch value\n1 0.500000\n");
    }
}
