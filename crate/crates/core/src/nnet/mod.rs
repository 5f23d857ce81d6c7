//! Stacked GRU language model: embedding, recurrent layers and a linear
//! decoder over the vocabulary, trained with Adam on full backpropagation
//! through each chunk.

mod adam;
mod checkpoint;
mod gru;
pub mod ops;
mod params;
mod train;

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use thiserror::Error;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gru::{
    backward, chunk_loss, cross_entropy, forward_step, gru_cell, Backward, HiddenState, Stepper,
};
pub use params::{GruLayer, ModelParams, Shape};
pub use train::{evaluate, train, TrainReport};

/// Floating-point type the model can run in.
pub trait Scalar:
    Float + FromPrimitive + Debug + Default + Send + Sync + Sum + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, Error)]
pub enum NnetError {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("{what}: expected length {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("token index {token} outside vocabulary of size {vocab}")]
    TokenOutOfRange { token: usize, vocab: usize },
    #[error("empty chunk")]
    EmptyChunk,
    #[error("no training chunks")]
    NoChunks,
    #[error("non-finite {what}")]
    NonFinite { what: &'static str },
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("checkpoint version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("checkpoint truncated: declared {declared} bytes, found {found}")]
    Truncated { declared: u64, found: u64 },
    #[error("checkpoint checksum mismatch")]
    Checksum,
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Architecture and optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub hidden_size: usize,
    pub n_layers: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub grad_clip: f64,
    pub epochs: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            vocab_size: 0,
            hidden_size: 500,
            n_layers: 3,
            seed: 0,
            learning_rate: 2e-3,
            grad_clip: 5.0,
            epochs: 15,
        }
    }
}

impl ModelConfig {
    pub fn shape(&self) -> Shape {
        Shape {
            vocab: self.vocab_size,
            hidden: self.hidden_size,
            layers: self.n_layers,
        }
    }

    pub fn validate(&self) -> Result<(), NnetError> {
        let bad = |m: &str| Err(NnetError::InvalidConfig(m.to_string()));
        if self.vocab_size == 0 {
            return bad("vocabulary size must be positive");
        }
        if self.hidden_size == 0 {
            return bad("hidden size must be positive");
        }
        if self.n_layers == 0 {
            return bad("at least one layer is required");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if !(self.grad_clip.is_finite() && self.grad_clip > 0.0) {
            return bad("gradient clip must be positive");
        }
        Ok(())
    }
}
