use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::preference::{ia_mean, log_sigmoid, sigmoid, weight_entropy, NoiseModel, ParticleSet, Query};

/// `bins + 1` equally spaced edges over `[lo, hi]`.
pub fn equal_width_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    assert!(bins >= 1 && hi > lo);
    let width = (hi - lo) / bins as f64;
    (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect()
}

fn bin_index(delta: f64, edges: &[f64]) -> usize {
    let bins = edges.len() - 1;
    edges.partition_point(|e| *e <= delta).saturating_sub(1).min(bins - 1)
}

/// Center of the half-open bin `[e_i, e_{i+1})` holding `delta`; values outside clamp to the end bins.
pub fn bin_ia_outcome(delta: f64, edges: &[f64]) -> f64 {
    let i = bin_index(delta, edges);
    0.5 * (edges[i] + edges[i + 1])
}

/// Entropy of the temporarily reweighted posterior. A constant log-likelihood leaves it unchanged.
fn entropy_after(ps: &ParticleSet, log_lik: &[f64], h0: f64) -> f64 {
    let (lo, hi) = log_lik
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &l| (lo.min(l), hi.max(l)));
    if lo == hi {
        return h0;
    }
    weight_entropy(&ps.reweight_log(log_lik).0)
}

/// Monte-Carlo expected entropy reduction from asking `query`.
///
/// `bins` discretizes simulated IA answers before the update; it is ignored for PS queries.
pub fn estimate_eig<R: Rng + ?Sized>(
    ps: &ParticleSet,
    query: &Query,
    noise: &NoiseModel,
    m: usize,
    bins: Option<usize>,
    rng: &mut R,
) -> f64 {
    assert!(m >= 1);
    let h0 = ps.entropy();
    let (a, b) = query.values();
    let draws = ps.sample_indices(m, rng);
    let mut total = 0.0;
    match query {
        Query::Ps { .. } => {
            let beta = noise.beta();
            let gaps = ps.gaps(a, b);
            let mut after: [Option<f64>; 2] = [None, None];
            for &s in &draws {
                let y = rng.random::<f64>() < sigmoid(beta * gaps[s]);
                let h = *after[y as usize].get_or_insert_with(|| {
                    let sign = if y { 1.0 } else { -1.0 };
                    let ll: Vec<f64> = gaps.iter().map(|g| log_sigmoid(sign * beta * g)).collect();
                    entropy_after(ps, &ll, h0)
                });
                total += h0 - h;
            }
        }
        Query::Ia { dim, .. } => {
            let means: Vec<f64> = ps.particles().map(|w| ia_mean(a, b, w, *dim, noise.eps)).collect();
            let normal = Normal::new(0.0, noise.sigma_ia).expect("positive sigma");
            let deltas: Vec<f64> = draws.iter().map(|&s| means[s] + normal.sample(rng)).collect();
            let two_var = 2.0 * noise.sigma_ia * noise.sigma_ia;
            let entropy_at = |delta: f64| {
                let ll: Vec<f64> = means.iter().map(|mu| -(delta - mu).powi(2) / two_var).collect();
                entropy_after(ps, &ll, h0)
            };
            match bins {
                Some(n) => {
                    let (lo, hi) = deltas
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
                    let mid = 0.5 * (lo + hi);
                    let half = 3.0 * noise.sigma_ia;
                    let edges = equal_width_edges(mid - half, mid + half, n);
                    let mut cache: HashMap<usize, f64> = HashMap::new();
                    for &d in &deltas {
                        let i = bin_index(d, &edges);
                        let h = *cache
                            .entry(i)
                            .or_insert_with(|| entropy_at(0.5 * (edges[i] + edges[i + 1])));
                        total += h0 - h;
                    }
                }
                None => {
                    for &d in &deltas {
                        total += h0 - entropy_at(d);
                    }
                }
            }
        }
    }
    (total / m as f64).max(0.0)
}
