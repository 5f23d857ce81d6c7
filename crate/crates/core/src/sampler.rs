//! Temperature softmax and sequential generation from a primed state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::Vocab;
use crate::nnet::{ModelParams, NnetError, Stepper};
use crate::segmenter::{detokenize_after, normalize, Segmenter, Token};

pub const DEFAULT_PRIME: &str = "Litwo! Ojczyzno moja!";

/// Allowed deviation of a distribution's total from 1.
pub const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("temperature must be positive and finite, got {0}")]
    BadTemperature(f64),
    #[error("logits must be finite and non-empty")]
    BadLogits,
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("generation length must be at least 1")]
    ZeroLength,
    #[error("prime text produced no tokens")]
    EmptyPrime,
    #[error(transparent)]
    Model(#[from] NnetError),
}

fn check_logits(z: &[f64]) -> Result<(), SampleError> {
    if z.is_empty() || z.iter().any(|x| !x.is_finite()) {
        return Err(SampleError::BadLogits);
    }
    Ok(())
}

/// `exp(z_i) / Σ exp(z_j)`, shifted by the maximum for stability.
pub fn softmax(z: &[f64]) -> Result<Vec<f64>, SampleError> {
    check_logits(z)?;
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    Ok(e.into_iter().map(|x| x / s).collect())
}

/// `exp(z_i / T) / Σ exp(z_j / T)`.
pub fn temperature_softmax(z: &[f64], t: f64) -> Result<Vec<f64>, SampleError> {
    if !(t.is_finite() && t > 0.0) {
        return Err(SampleError::BadTemperature(t));
    }
    if t == 1.0 {
        return softmax(z);
    }
    check_logits(z)?;
    let scaled: Vec<f64> = z.iter().map(|x| x / t).collect();
    softmax(&scaled)
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in z.iter().enumerate() {
        if x > z[best] {
            best = i;
        }
    }
    best
}

/// Shannon entropy in nats.
pub fn entropy(q: &[f64]) -> f64 {
    -q.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
}

/// Inverse-CDF draw from `q`.
pub fn sample_index<R: Rng + ?Sized>(q: &[f64], rng: &mut R) -> Result<usize, SampleError> {
    if q.is_empty() || q.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(SampleError::NotNormalized(f64::NAN));
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(SampleError::NotNormalized(total));
    }
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in q.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(last)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    Sample,
    Argmax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub prime: String,
    pub length: usize,
    pub temperature: f64,
    pub seed: u64,
    pub mode: DecodeMode,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            prime: DEFAULT_PRIME.to_string(),
            length: 200,
            temperature: 0.8,
            seed: 0,
            mode: DecodeMode::Sample,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), SampleError> {
        if self.length == 0 {
            return Err(SampleError::ZeroLength);
        }
        if self.mode == DecodeMode::Sample && !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(SampleError::BadTemperature(self.temperature));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    /// Generated tokens only; the prime is not included.
    pub tokens: Vec<Token>,
    /// Prime text followed by the rendered continuation.
    pub text: String,
    /// Entropy of the distribution each token was drawn from (zero in
    /// argmax mode).
    pub entropies: Vec<f64>,
}

impl Generation {
    pub fn mean_entropy(&self) -> f64 {
        crate::metrics::mean_step_entropy(&self.entropies)
    }
}

/// Feeds `prime` through the model, then produces `cfg.length` tokens, each
/// fed back as the next input.
pub fn generate_from_tokens(
    params: &ModelParams<f32>,
    vocab: &Vocab,
    prime: &[Token],
    cfg: &GenerationConfig,
) -> Result<(Vec<Token>, Vec<f64>), SampleError> {
    cfg.validate()?;
    if prime.is_empty() {
        return Err(SampleError::EmptyPrime);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stepper = Stepper::new(params);
    let mut logits: Vec<f64> = Vec::new();
    for idx in vocab.encode(prime) {
        logits = stepper.feed(idx)?.iter().map(|&x| x as f64).collect();
    }
    let mut out = Vec::with_capacity(cfg.length);
    let mut entropies = Vec::with_capacity(cfg.length);
    for step in 0..cfg.length {
        let next = match cfg.mode {
            DecodeMode::Argmax => {
                check_logits(&logits)?;
                entropies.push(0.0);
                argmax(&logits)
            }
            DecodeMode::Sample => {
                let q = temperature_softmax(&logits, cfg.temperature)?;
                entropies.push(entropy(&q));
                sample_index(&q, &mut rng)?
            }
        };
        out.push(vocab.token(next).cloned().unwrap_or(Token::UNK));
        if step + 1 < cfg.length {
            logits = stepper.feed(next)?.iter().map(|&x| x as f64).collect();
        }
    }
    Ok((out, entropies))
}

/// Tokenizes `cfg.prime` with `segmenter` and generates a continuation.
pub fn generate(
    params: &ModelParams<f32>,
    vocab: &Vocab,
    segmenter: &Segmenter,
    cfg: &GenerationConfig,
) -> Result<Generation, SampleError> {
    let prime_text = normalize(&cfg.prime);
    let prime = segmenter.tokenize(&prime_text);
    let (tokens, entropies) = generate_from_tokens(params, vocab, &prime, cfg)?;
    let mut text = prime_text;
    text.push_str(&detokenize_after(&prime, &tokens));
    Ok(Generation {
        tokens,
        text,
        entropies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_value() {
        let q = temperature_softmax(&[1.0, 2.0], 0.5).unwrap();
        assert!((q[0] - 0.11920).abs() < 1e-5);
        assert!((q[1] - 0.88080).abs() < 1e-5);
    }

    #[test]
    fn symmetric_and_unit_temperature() {
        for t in [0.1, 1.0, 7.0] {
            assert_eq!(temperature_softmax(&[0.0, 0.0], t).unwrap(), vec![0.5, 0.5]);
        }
        let z = [0.3, -1.2, 2.5];
        assert_eq!(temperature_softmax(&z, 1.0).unwrap(), softmax(&z).unwrap());
    }

    #[test]
    fn rejects_bad_temperature() {
        for t in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(temperature_softmax(&[1.0], t).is_err());
        }
    }

    #[test]
    fn degenerate_and_unnormalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample_index(&[1.0, 0.0, 0.0], &mut rng).unwrap(), 0);
            assert_eq!(sample_index(&[0.0, 0.0, 1.0], &mut rng).unwrap(), 2);
        }
        assert!(sample_index(&[0.5, 0.6], &mut rng).is_err());
        assert!(sample_index(&[], &mut rng).is_err());
    }

    #[test]
    fn seeded_draws_repeat() {
        let q = [0.1, 0.2, 0.3, 0.4];
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| sample_index(&q, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
    }

    #[test]
    fn empirical_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| sample_index(&[0.25, 0.75], &mut rng).unwrap() == 1)
            .count();
        assert!((ones as f64 / n as f64 - 0.75).abs() < 0.01);
    }

    #[test]
    fn argmax_ties_lowest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 0.0]), 1);
    }

    #[test]
    fn entropy_limits() {
        assert!((entropy(&[0.25; 4]) - 4f64.ln()).abs() < 1e-12);
        assert_eq!(entropy(&[0.0, 1.0, 0.0]), 0.0);
    }
}
