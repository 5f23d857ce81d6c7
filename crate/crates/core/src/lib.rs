//! Syllable-level Polish text generation.
//!
//! The pipeline runs [`segmenter`] → [`corpus`] → [`nnet`] → [`sampler`],
//! with [`metrics`] scoring both training and generated text.

pub mod corpus;
pub mod nnet;
pub mod metrics;
pub mod sampler;
pub mod segmenter;
