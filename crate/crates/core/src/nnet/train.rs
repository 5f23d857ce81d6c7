use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::ChunkPair;

use super::adam::{Adam, AdamConfig};
use super::gru::{backward, chunk_loss, HiddenState};
use super::params::ModelParams;
use super::{ModelConfig, NnetError};

/// Offset mixed into the seed for the chunk-order stream, so shuffling does
/// not replay the initialization draws.
const SHUFFLE_STREAM: u64 = 0x5348_5546_464c_4531;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean loss of the untrained model over all chunks.
    pub initial_loss: f64,
    /// Mean training loss per epoch.
    pub losses: Vec<f64>,
    /// Value returned by the epoch hook, when it returned one.
    pub bad_words: Vec<f64>,
    /// Not deterministic; kept out of every output file.
    pub epoch_seconds: Vec<f64>,
}

/// Mean loss over `chunks`, each evaluated from a zero state.
pub fn evaluate(params: &ModelParams<f32>, chunks: &[ChunkPair]) -> Result<f64, NnetError> {
    if chunks.is_empty() {
        return Err(NnetError::NoChunks);
    }
    let zero = HiddenState::for_params(params);
    let mut total = 0.0;
    for c in chunks {
        total += chunk_loss(params, c, &zero)?;
    }
    Ok(total / chunks.len() as f64)
}

/// Trains a freshly initialized model for `cfg.epochs` epochs.
///
/// Each epoch visits every chunk once in an order drawn from the seed,
/// starting each chunk from a zero state, and takes one Adam step per chunk.
/// After every epoch `hook(epoch, mean_loss, &params)` runs (epochs count
/// from 1); a returned value is appended to [`TrainReport::bad_words`].
pub fn train<H>(
    chunks: &[ChunkPair],
    cfg: &ModelConfig,
    mut hook: H,
) -> Result<(ModelParams<f32>, TrainReport), NnetError>
where
    H: FnMut(usize, f64, &ModelParams<f32>) -> Option<f64>,
{
    if chunks.is_empty() {
        return Err(NnetError::NoChunks);
    }
    let mut params = ModelParams::<f32>::init(cfg)?;
    let initial_loss = evaluate(&params, chunks)?;
    let mut opt = Adam::new(
        AdamConfig {
            learning_rate: cfg.learning_rate,
            ..AdamConfig::default()
        },
        params.as_slice().len(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..chunks.len()).collect();
    let zero = HiddenState::for_params(&params);
    let mut report = TrainReport {
        initial_loss,
        losses: Vec::with_capacity(cfg.epochs),
        bad_words: Vec::new(),
        epoch_seconds: Vec::with_capacity(cfg.epochs),
    };
    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let b = backward(&params, &chunks[i], &zero, cfg.grad_clip)?;
            total += b.loss;
            opt.step(&mut params, &b.grads)?;
        }
        if !params.is_finite() {
            return Err(NnetError::NonFinite { what: "parameter" });
        }
        let loss = total / chunks.len() as f64;
        report.losses.push(loss);
        report.epoch_seconds.push(start.elapsed().as_secs_f64());
        if let Some(v) = hook(epoch, loss, &params) {
            report.bad_words.push(v);
        }
    }
    Ok((params, report))
}
