use super::params::ModelParams;
use super::{NnetError, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 2e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias-corrected moment estimates. Moments are kept in f64.
#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(cfg: AdamConfig, n_params: usize) -> Self {
        Adam {
            cfg,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step<F: Scalar>(
        &mut self,
        params: &mut ModelParams<F>,
        grads: &ModelParams<F>,
    ) -> Result<(), NnetError> {
        let n = self.m.len();
        for (what, len) in [("parameters", params.as_slice().len()), ("gradients", grads.as_slice().len())] {
            if len != n {
                return Err(NnetError::Dimension {
                    what,
                    expected: n,
                    found: len,
                });
            }
        }
        self.t += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            eps,
        } = self.cfg;
        let t = self.t as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        let p = params.as_mut_slice();
        for (i, g) in grads.as_slice().iter().enumerate() {
            let g = g.to_f64().unwrap_or(f64::NAN);
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            let delta = learning_rate * m_hat / (v_hat.sqrt() + eps);
            p[i] = p[i] - F::from_f64(delta).unwrap_or_else(F::nan);
        }
        Ok(())
    }
}
