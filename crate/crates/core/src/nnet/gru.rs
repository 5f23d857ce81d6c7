//! Forward pass, cross-entropy and backpropagation through time.
//!
//! Cell equations, with the reset gate applied to the candidate's recurrent
//! term:
//!
//! ```text
//! z  = σ(W_z x + U_z h + b_z)
//! r  = σ(W_r x + U_r h + b_r)
//! n  = tanh(W_n x + r ⊙ (U_n h + b_n))
//! h' = (1 − z) ⊙ n + z ⊙ h
//! ```

use crate::corpus::ChunkPair;

use super::ops::{axpy, matvec, matvec_t_acc, outer_acc, sigmoid};
use super::params::{GruLayer, ModelParams};
use super::{NnetError, Scalar};

/// Per-layer recurrent state.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState<F> {
    pub layers: Vec<Vec<F>>,
}

impl<F: Scalar> HiddenState<F> {
    pub fn zeros(layers: usize, hidden: usize) -> Self {
        HiddenState {
            layers: vec![vec![F::zero(); hidden]; layers],
        }
    }

    pub fn for_params(params: &ModelParams<F>) -> Self {
        let s = params.shape();
        Self::zeros(s.layers, s.hidden)
    }
}

/// Gate activations of one cell evaluation, kept for the backward pass.
#[derive(Debug, Clone)]
struct CellCache<F> {
    z: Vec<F>,
    r: Vec<F>,
    /// `U_n h + b_n`
    un: Vec<F>,
    n: Vec<F>,
}

impl<F: Scalar> CellCache<F> {
    fn new(h: usize) -> Self {
        CellCache {
            z: vec![F::zero(); h],
            r: vec![F::zero(); h],
            un: vec![F::zero(); h],
            n: vec![F::zero(); h],
        }
    }
}

/// Scratch for the two `3H` pre-activation products.
struct CellScratch<F> {
    wx: Vec<F>,
    uh: Vec<F>,
}

impl<F: Scalar> CellScratch<F> {
    fn new(h: usize) -> Self {
        CellScratch {
            wx: vec![F::zero(); 3 * h],
            uh: vec![F::zero(); 3 * h],
        }
    }
}

fn cell_forward<F: Scalar>(
    layer: &GruLayer<'_, F>,
    x: &[F],
    h: &[F],
    scratch: &mut CellScratch<F>,
    cache: &mut CellCache<F>,
    out: &mut [F],
) {
    let hs = layer.hidden;
    matvec(layer.w, x, &mut scratch.wx);
    matvec(layer.u, h, &mut scratch.uh);
    let b = layer.b;
    for i in 0..hs {
        let z = sigmoid(scratch.wx[i] + scratch.uh[i] + b[i]);
        let r = sigmoid(scratch.wx[hs + i] + scratch.uh[hs + i] + b[hs + i]);
        let un = scratch.uh[2 * hs + i] + b[2 * hs + i];
        let n = (scratch.wx[2 * hs + i] + r * un).tanh();
        cache.z[i] = z;
        cache.r[i] = r;
        cache.un[i] = un;
        cache.n[i] = n;
        out[i] = (F::one() - z) * n + z * h[i];
    }
}

/// One GRU cell evaluation.
pub fn gru_cell<F: Scalar>(x: &[F], h: &[F], layer: &GruLayer<'_, F>) -> Result<Vec<F>, NnetError> {
    let hs = layer.hidden;
    if x.len() != layer.input {
        return Err(NnetError::Dimension {
            what: "cell input",
            expected: layer.input,
            found: x.len(),
        });
    }
    if h.len() != hs {
        return Err(NnetError::Dimension {
            what: "cell state",
            expected: hs,
            found: h.len(),
        });
    }
    if layer.w.len() != 3 * hs * layer.input || layer.u.len() != 3 * hs * hs || layer.b.len() != 3 * hs
    {
        return Err(NnetError::Dimension {
            what: "cell weights",
            expected: 3 * hs * (layer.input + hs + 1),
            found: layer.w.len() + layer.u.len() + layer.b.len(),
        });
    }
    let mut out = vec![F::zero(); hs];
    cell_forward(
        layer,
        x,
        h,
        &mut CellScratch::new(hs),
        &mut CellCache::new(hs),
        &mut out,
    );
    Ok(out)
}

/// `−log softmax(logits)[target]` via log-sum-exp.
pub fn cross_entropy<F: Scalar>(logits: &[F], target: usize) -> F {
    let m = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let sum = logits.iter().fold(F::zero(), |acc, &z| acc + (z - m).exp());
    m + sum.ln() - logits[target]
}

fn check_token<F: Scalar>(params: &ModelParams<F>, token: usize) -> Result<(), NnetError> {
    let vocab = params.shape().vocab;
    if token >= vocab {
        return Err(NnetError::TokenOutOfRange { token, vocab });
    }
    Ok(())
}

/// Runs the model one token at a time while reusing its buffers.
pub struct Stepper<'a, F: Scalar> {
    params: &'a ModelParams<F>,
    state: HiddenState<F>,
    scratch: CellScratch<F>,
    cache: CellCache<F>,
    next: Vec<F>,
    logits: Vec<F>,
}

impl<'a, F: Scalar> Stepper<'a, F> {
    pub fn new(params: &'a ModelParams<F>) -> Self {
        Self::with_state(params, HiddenState::for_params(params))
    }

    pub fn with_state(params: &'a ModelParams<F>, state: HiddenState<F>) -> Self {
        let s = params.shape();
        Stepper {
            params,
            state,
            scratch: CellScratch::new(s.hidden),
            cache: CellCache::new(s.hidden),
            next: vec![F::zero(); s.hidden],
            logits: vec![F::zero(); s.vocab],
        }
    }

    pub fn state(&self) -> &HiddenState<F> {
        &self.state
    }

    pub fn into_state(self) -> HiddenState<F> {
        self.state
    }

    /// Feeds `token` and returns the logits for the following one.
    pub fn feed(&mut self, token: usize) -> Result<&[F], NnetError> {
        check_token(self.params, token)?;
        let p = self.params;
        for l in 0..p.shape().layers {
            let x: &[F] = if l == 0 {
                p.encoder_row(token)
            } else {
                &self.state.layers[l - 1]
            };
            cell_forward(
                &p.layer(l),
                x,
                &self.state.layers[l],
                &mut self.scratch,
                &mut self.cache,
                &mut self.next,
            );
            std::mem::swap(&mut self.state.layers[l], &mut self.next);
        }
        let top = self.state.layers.last().expect("at least one layer");
        let (dw, db) = p.decoder();
        matvec(dw, top, &mut self.logits);
        for (o, &b) in self.logits.iter_mut().zip(db) {
            *o = *o + b;
        }
        Ok(&self.logits)
    }
}

/// Pure single step: logits for the next token and the updated state.
pub fn forward_step<F: Scalar>(
    params: &ModelParams<F>,
    token: usize,
    state: &HiddenState<F>,
) -> Result<(Vec<F>, HiddenState<F>), NnetError> {
    let mut s = Stepper::with_state(params, state.clone());
    let logits = s.feed(token)?.to_vec();
    Ok((logits, s.into_state()))
}

fn check_chunk<F: Scalar>(params: &ModelParams<F>, chunk: &ChunkPair) -> Result<(), NnetError> {
    if chunk.is_empty() || chunk.input.len() != chunk.target.len() {
        return Err(NnetError::EmptyChunk);
    }
    for &t in chunk.input.iter().chain(&chunk.target) {
        check_token(params, t)?;
    }
    Ok(())
}

/// Mean cross-entropy of a chunk without gradients.
pub fn chunk_loss<F: Scalar>(
    params: &ModelParams<F>,
    chunk: &ChunkPair,
    state0: &HiddenState<F>,
) -> Result<f64, NnetError> {
    check_chunk(params, chunk)?;
    let mut s = Stepper::with_state(params, state0.clone());
    let mut total = 0.0;
    for (&x, &y) in chunk.input.iter().zip(&chunk.target) {
        let logits = s.feed(x)?;
        total += cross_entropy(logits, y).to_f64().unwrap_or(f64::NAN);
    }
    let mean = total / chunk.len() as f64;
    if !mean.is_finite() {
        return Err(NnetError::NonFinite { what: "loss" });
    }
    Ok(mean)
}

/// Result of one backward pass.
#[derive(Debug, Clone)]
pub struct Backward<F> {
    pub grads: ModelParams<F>,
    pub loss: f64,
    /// Global gradient norm before clipping.
    pub grad_norm: f64,
}

/// Gradients of the mean chunk cross-entropy by full backpropagation through
/// every step of the chunk, rescaled so their global norm is at most
/// `grad_clip`.
pub fn backward<F: Scalar>(
    params: &ModelParams<F>,
    chunk: &ChunkPair,
    state0: &HiddenState<F>,
    grad_clip: f64,
) -> Result<Backward<F>, NnetError> {
    check_chunk(params, chunk)?;
    let shape = params.shape();
    let (hs, nl, v) = (shape.hidden, shape.layers, shape.vocab);
    let steps = chunk.len();
    let inv_steps = F::from_f64(1.0 / steps as f64).expect("finite");

    // forward, keeping every activation
    let mut caches: Vec<CellCache<F>> = (0..steps * nl).map(|_| CellCache::new(hs)).collect();
    let mut states: Vec<Vec<F>> = vec![vec![F::zero(); hs]; steps * nl];
    let mut dlogits: Vec<F> = vec![F::zero(); steps * v];
    let mut scratch = CellScratch::new(hs);
    let (dec_w, dec_b) = params.decoder();
    let mut total_loss = 0.0;
    for t in 0..steps {
        for l in 0..nl {
            let idx = t * nl + l;
            let (done, rest) = states.split_at_mut(idx);
            let out = &mut rest[0];
            let h_prev: &[F] = if t == 0 { &state0.layers[l] } else { &done[idx - nl] };
            let x: &[F] = if l == 0 {
                params.encoder_row(chunk.input[t])
            } else {
                &done[idx - 1]
            };
            cell_forward(&params.layer(l), x, h_prev, &mut scratch, &mut caches[idx], out);
        }
        let top = &states[t * nl + nl - 1];
        let g = &mut dlogits[t * v..(t + 1) * v];
        matvec(dec_w, top, g);
        for (gi, &b) in g.iter_mut().zip(dec_b) {
            *gi = *gi + b;
        }
        let target = chunk.target[t];
        total_loss += cross_entropy(g, target).to_f64().unwrap_or(f64::NAN);
        // turn logits into (softmax − onehot) / steps in place
        let m = g.iter().copied().fold(F::neg_infinity(), F::max);
        let mut sum = F::zero();
        for gi in g.iter_mut() {
            *gi = (*gi - m).exp();
            sum = sum + *gi;
        }
        let scale = inv_steps / sum;
        for gi in g.iter_mut() {
            *gi = *gi * scale;
        }
        g[target] = g[target] - inv_steps;
    }
    let loss = total_loss / steps as f64;
    if !loss.is_finite() {
        return Err(NnetError::NonFinite { what: "loss" });
    }

    // backward
    let mut grads = ModelParams::zeros(shape);
    {
        let gp = grads.parts_mut();
        let (enc_g, mut layer_g, dec_wg, dec_bg) = (gp.encoder, gp.layers, gp.decoder_w, gp.decoder_b);
        let mut carry: Vec<Vec<F>> = vec![vec![F::zero(); hs]; nl];
        let mut dh = vec![F::zero(); hs];
        let mut dx = vec![F::zero(); hs];
        let mut d_wx = vec![F::zero(); 3 * hs];
        let mut d_uh = vec![F::zero(); 3 * hs];
        for t in (0..steps).rev() {
            let g = &dlogits[t * v..(t + 1) * v];
            let top = &states[t * nl + nl - 1];
            outer_acc(g, top, dec_wg);
            for (a, &b) in dec_bg.iter_mut().zip(g) {
                *a = *a + b;
            }
            // gradient arriving at the top layer's output
            dx.iter_mut().for_each(|x| *x = F::zero());
            matvec_t_acc(dec_w, g, &mut dx);
            for l in (0..nl).rev() {
                let idx = t * nl + l;
                for i in 0..hs {
                    dh[i] = carry[l][i] + dx[i];
                }
                let c = &caches[idx];
                let h_prev: &[F] = if t == 0 { &state0.layers[l] } else { &states[idx - nl] };
                let x: &[F] = if l == 0 {
                    params.encoder_row(chunk.input[t])
                } else {
                    &states[idx - 1]
                };
                let lw = params.layer(l);
                let one = F::one();
                for i in 0..hs {
                    let (z, r, un, n) = (c.z[i], c.r[i], c.un[i], c.n[i]);
                    let dn = dh[i] * (one - z);
                    let dz = dh[i] * (h_prev[i] - n);
                    let da_n = dn * (one - n * n);
                    let da_z = dz * z * (one - z);
                    let da_r = da_n * un * r * (one - r);
                    d_wx[i] = da_z;
                    d_wx[hs + i] = da_r;
                    d_wx[2 * hs + i] = da_n;
                    d_uh[i] = da_z;
                    d_uh[hs + i] = da_r;
                    d_uh[2 * hs + i] = da_n * r;
                    carry[l][i] = dh[i] * z;
                }
                let lg = &mut layer_g[l];
                outer_acc(&d_wx, x, lg.w);
                outer_acc(&d_uh, h_prev, lg.u);
                for (a, &b) in lg.b.iter_mut().zip(&d_uh) {
                    *a = *a + b;
                }
                matvec_t_acc(lw.u, &d_uh, &mut carry[l]);
                dx.iter_mut().for_each(|x| *x = F::zero());
                matvec_t_acc(lw.w, &d_wx, &mut dx);
            }
            let row = chunk.input[t] * hs;
            axpy(F::one(), &dx, &mut enc_g[row..row + hs]);
        }
    }

    let grad_norm = grads.norm();
    if !grad_norm.is_finite() {
        return Err(NnetError::NonFinite { what: "gradient" });
    }
    if grad_norm > grad_clip {
        grads.scale(F::from_f64(grad_clip / grad_norm).expect("finite"));
    }
    Ok(Backward {
        grads,
        loss,
        grad_norm,
    })
}
