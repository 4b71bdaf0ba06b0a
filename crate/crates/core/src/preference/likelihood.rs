//! PS and IA observation models in value space (higher is better).

use serde::{Deserialize, Serialize};

use crate::dot;

/// Noise parameters shared by the posterior, the controller and synthetic DMs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub sigma_ps: f64,
    pub sigma_ia: f64,
    /// Floor on `w_k` in the IA mean.
    pub eps: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            sigma_ps: 0.15,
            sigma_ia: 0.18,
            eps: 1e-3,
        }
    }
}

impl NoiseModel {
    /// Logistic slope `beta = 1 / sigma_ps`.
    pub fn beta(&self) -> f64 {
        1.0 / self.sigma_ps
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln sigma(z)`, stable in both tails.
pub fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Probability that A is preferred to B.
pub fn ps_likelihood(a_value: &[f64], b_value: &[f64], w: &[f64], beta: f64) -> f64 {
    sigmoid(beta * utility_gap(a_value, b_value, w))
}

/// Mean of the reported adjustment along objective `k`.
pub fn ia_mean(a_value: &[f64], b_value: &[f64], w: &[f64], k: usize, eps: f64) -> f64 {
    utility_gap(a_value, b_value, w) / w[k].max(eps)
}

pub(crate) fn utility_gap(a_value: &[f64], b_value: &[f64], w: &[f64]) -> f64 {
    dot(w, a_value) - dot(w, b_value)
}

/// Fisher information of a PS query at `w`.
pub fn fisher_info_ps(a_value: &[f64], b_value: &[f64], w: &[f64], sigma_ps: f64) -> f64 {
    let gap = utility_gap(a_value, b_value, w);
    let p = sigmoid(gap / sigma_ps);
    (gap * gap) / (sigma_ps * sigma_ps) * p * (1.0 - p)
}

/// Fisher information of an IA query; independent of `w`.
pub fn fisher_info_ia(sigma_ia: f64) -> f64 {
    1.0 / (sigma_ia * sigma_ia)
}
