use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelConfig, NnetError, Scalar};

/// Dimensions that fix the parameter layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub vocab: usize,
    pub hidden: usize,
    pub layers: usize,
}

impl Shape {
    pub fn encoder_len(&self) -> usize {
        self.vocab * self.hidden
    }

    /// Input weights, recurrent weights and biases of one GRU layer.
    pub fn layer_len(&self) -> usize {
        6 * self.hidden * self.hidden + 3 * self.hidden
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.encoder_len() + layer * self.layer_len()
    }

    fn decoder_offset(&self) -> usize {
        self.layer_offset(self.layers)
    }

    pub fn total(&self) -> usize {
        self.decoder_offset() + self.vocab * self.hidden + self.vocab
    }
}

/// Borrowed weights of one GRU layer.
///
/// `w` is `3H × I` and `u` is `3H × H`, both row-major with the update,
/// reset and candidate blocks stacked in that order; `b` holds `b_z`, `b_r`
/// and the candidate's recurrent bias `b_n`.
#[derive(Debug, Clone, Copy)]
pub struct GruLayer<'a, F> {
    pub hidden: usize,
    pub input: usize,
    pub w: &'a [F],
    pub u: &'a [F],
    pub b: &'a [F],
}

pub(crate) struct GruLayerMut<'a, F> {
    pub w: &'a mut [F],
    pub u: &'a mut [F],
    pub b: &'a mut [F],
}

pub(crate) struct ParamsMut<'a, F> {
    pub encoder: &'a mut [F],
    pub layers: Vec<GruLayerMut<'a, F>>,
    pub decoder_w: &'a mut [F],
    pub decoder_b: &'a mut [F],
}

/// Every trainable weight in one flat buffer.
///
/// Order: encoder (`V × H`, one row per token), then for each layer `W`,
/// `U`, `b`, then the decoder matrix (`V × H`, one row per output token) and
/// decoder bias (`V`). Gradients use the same type and layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    shape: Shape,
    data: Vec<F>,
}

impl<F: Scalar> ModelParams<F> {
    pub fn zeros(shape: Shape) -> Self {
        ModelParams {
            shape,
            data: vec![F::zero(); shape.total()],
        }
    }

    pub fn from_vec(shape: Shape, data: Vec<F>) -> Result<Self, NnetError> {
        if data.len() != shape.total() {
            return Err(NnetError::Dimension {
                what: "parameter buffer",
                expected: shape.total(),
                found: data.len(),
            });
        }
        Ok(ModelParams { shape, data })
    }

    /// Weights uniform in `[-1/sqrt(H), 1/sqrt(H)]` from a ChaCha8 stream
    /// seeded with `cfg.seed`; biases zero.
    pub fn init(cfg: &ModelConfig) -> Result<Self, NnetError> {
        cfg.validate()?;
        let shape = cfg.shape();
        let mut p = Self::zeros(shape);
        let bound = 1.0 / (shape.hidden as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut fill = |xs: &mut [F]| {
            for x in xs {
                *x = F::from_f64(rng.gen_range(-bound..=bound)).expect("finite");
            }
        };
        let parts = p.parts_mut();
        fill(parts.encoder);
        for layer in parts.layers {
            fill(layer.w);
            fill(layer.u);
        }
        fill(parts.decoder_w);
        Ok(p)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn encoder_row(&self, token: usize) -> &[F] {
        let h = self.shape.hidden;
        &self.data[token * h..(token + 1) * h]
    }

    pub fn layer(&self, l: usize) -> GruLayer<'_, F> {
        let h = self.shape.hidden;
        let start = self.shape.layer_offset(l);
        let block = &self.data[start..start + self.shape.layer_len()];
        let (w, rest) = block.split_at(3 * h * h);
        let (u, b) = rest.split_at(3 * h * h);
        GruLayer {
            hidden: h,
            input: h,
            w,
            u,
            b,
        }
    }

    pub fn decoder(&self) -> (&[F], &[F]) {
        let start = self.shape.decoder_offset();
        self.data[start..].split_at(self.shape.vocab * self.shape.hidden)
    }

    pub(crate) fn parts_mut(&mut self) -> ParamsMut<'_, F> {
        let s = self.shape;
        let h = s.hidden;
        let (encoder, mut rest) = self.data.split_at_mut(s.encoder_len());
        let mut layers = Vec::with_capacity(s.layers);
        for _ in 0..s.layers {
            let (block, tail) = rest.split_at_mut(s.layer_len());
            rest = tail;
            let (w, block) = block.split_at_mut(3 * h * h);
            let (u, b) = block.split_at_mut(3 * h * h);
            layers.push(GruLayerMut { w, u, b });
        }
        let (decoder_w, decoder_b) = rest.split_at_mut(s.vocab * h);
        ParamsMut {
            encoder,
            layers,
            decoder_w,
            decoder_b,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Euclidean norm accumulated in f64.
    pub fn norm(&self) -> f64 {
        self.data
            .iter()
            .map(|x| {
                let v = x.to_f64().unwrap_or(f64::NAN);
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: F) {
        for x in &mut self.data {
            *x = *x * factor;
        }
    }

    /// Element-wise conversion, e.g. to f64 for verification.
    pub fn cast<G: Scalar>(&self) -> ModelParams<G> {
        ModelParams {
            shape: self.shape,
            data: self
                .data
                .iter()
                .map(|x| G::from(*x).expect("representable"))
                .collect(),
        }
    }
}
