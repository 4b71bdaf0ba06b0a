use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::evolution::{Archive, Bounds};
use crate::utility;

/// Predicted objective vector with a per-objective spread.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub trait ObjectivePredictor {
    fn predict(&self, x: &[f64]) -> Prediction;
}

/// Inverse-distance-weighted k-nearest-neighbour interpolation over the archive,
/// with distances in box-normalized decision space. Exact on archived points.
pub struct IdwKnn<'a> {
    archive: &'a Archive,
    span: Vec<f64>,
    k: usize,
}

impl<'a> IdwKnn<'a> {
    pub fn new(archive: &'a Archive, bounds: &'a Bounds, k: usize) -> Self {
        let span = bounds.lower.iter().zip(&bounds.upper).map(|(l, u)| u - l).collect();
        IdwKnn {
            archive,
            span,
            k: k.max(1),
        }
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.span)
            .map(|((a, b), s)| ((a - b) / s).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

impl ObjectivePredictor for IdwKnn<'_> {
    fn predict(&self, x: &[f64]) -> Prediction {
        let entries = self.archive.entries();
        assert!(!entries.is_empty(), "predictor needs a nonempty archive");
        let mut near: Vec<(f64, usize)> = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (self.distance(x, &e.x), i))
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let m = entries[0].f.len();
        if near[0].0 == 0.0 {
            return Prediction {
                mean: entries[near[0].1].f.clone(),
                std: vec![0.0; m],
            };
        }
        near.truncate(self.k);
        let raw: Vec<f64> = near.iter().map(|(d, _)| 1.0 / (d * d)).collect();
        let total: f64 = raw.iter().sum();
        let mut mean = vec![0.0; m];
        for ((_, i), r) in near.iter().zip(&raw) {
            for (acc, f) in mean.iter_mut().zip(&entries[*i].f) {
                *acc += r / total * f;
            }
        }
        let mut var = vec![0.0; m];
        for ((_, i), r) in near.iter().zip(&raw) {
            for ((acc, f), mu) in var.iter_mut().zip(&entries[*i].f).zip(&mean) {
                *acc += r / total * (f - mu).powi(2);
            }
        }
        Prediction {
            mean,
            std: var.into_iter().map(f64::sqrt).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocEstimate {
    pub value: f64,
    /// Index of the candidate achieving `value`.
    pub best: usize,
    pub u_best: f64,
    pub u_cand: f64,
}

/// Expected gain in best expected utility from evaluating one candidate.
///
/// Utilities are taken at the posterior mean `weights`. A candidate with a
/// zero-spread prediction contributes `max(0, u - u_best)`; otherwise the
/// expected improvement under a normal predictive utility. `None` when there
/// are no candidates or the archive is empty.
pub fn voc_eval<P: ObjectivePredictor + ?Sized>(
    weights: &[f64],
    candidates: &[Vec<f64>],
    archive: &Archive,
    predictor: &P,
) -> Option<VocEstimate> {
    if candidates.is_empty() || archive.is_empty() {
        return None;
    }
    let u_best = archive
        .entries()
        .iter()
        .map(|e| utility(&e.f, weights))
        .fold(f64::NEG_INFINITY, f64::max);
    let std_normal = Normal::standard();
    let mut out = VocEstimate {
        value: f64::NEG_INFINITY,
        best: 0,
        u_best,
        u_cand: f64::NEG_INFINITY,
    };
    for (c, x) in candidates.iter().enumerate() {
        let pred = predictor.predict(x);
        let mu = utility(&pred.mean, weights);
        let sd = pred
            .std
            .iter()
            .zip(weights)
            .map(|(s, w)| (s * w).powi(2))
            .sum::<f64>()
            .sqrt();
        let gain = mu - u_best;
        let value = if sd > 0.0 {
            let z = gain / sd;
            (gain * std_normal.cdf(z) + sd * std_normal.pdf(z)).max(0.0)
        } else {
            gain.max(0.0)
        };
        out.u_cand = out.u_cand.max(mu);
        if value > out.value {
            out.value = value;
            out.best = c;
        }
    }
    Some(out)
}
