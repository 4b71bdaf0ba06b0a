//! Simulated binary crossover and bounded polynomial mutation.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len(), upper.len());
        Bounds { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clip(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .all(|((v, lo), hi)| *v >= *lo && *v <= *hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }
}

/// Operator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Variation {
    pub eta_c: f64,
    pub eta_m: f64,
    pub crossover_prob: f64,
    pub crossover_var_prob: f64,
    /// Per-variable mutation probability; `None` means `1/d`.
    pub mutation_prob: Option<f64>,
}

impl Default for Variation {
    fn default() -> Self {
        Variation {
            eta_c: 20.0,
            eta_m: 20.0,
            crossover_prob: 0.9,
            crossover_var_prob: 0.5,
            mutation_prob: None,
        }
    }
}

/// Inverse CDF of the SBX spread factor for a uniform draw `u` in `[0, 1)`.
pub fn sbx_spread_factor(u: f64, eta: f64) -> f64 {
    let e = 1.0 / (eta + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(e)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(e)
    }
}

pub fn sbx_crossover<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    bounds: &Bounds,
    params: &Variation,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.random::<f64>() >= params.crossover_prob {
        return (c1, c2);
    }
    for i in 0..p1.len() {
        if rng.random::<f64>() >= params.crossover_var_prob || p1[i] == p2[i] {
            continue;
        }
        let beta = sbx_spread_factor(rng.random::<f64>(), params.eta_c);
        let (a, b) = (p1[i], p2[i]);
        c1[i] = 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b);
        c2[i] = 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b);
    }
    bounds.clip(&mut c1);
    bounds.clip(&mut c2);
    (c1, c2)
}

/// Bounded polynomial mutation: each coordinate mutates with probability `prob`.
pub fn polynomial_mutation<R: Rng + ?Sized>(x: &[f64], bounds: &Bounds, eta_m: f64, prob: f64, rng: &mut R) -> Vec<f64> {
    let mut y = x.to_vec();
    let power = 1.0 / (eta_m + 1.0);
    for i in 0..y.len() {
        if rng.random::<f64>() >= prob {
            continue;
        }
        let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        let delta1 = (y[i] - lo) / span;
        let delta2 = (hi - y[i]) / span;
        let u: f64 = rng.random();
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta1).powf(eta_m + 1.0);
            v.powf(power) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta2).powf(eta_m + 1.0);
            1.0 - v.powf(power)
        };
        // In exact arithmetic the bounded formula stays inside; the clamp only absorbs rounding.
        y[i] = (y[i] + dq * span).clamp(lo, hi);
    }
    y
}
