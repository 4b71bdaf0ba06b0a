use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::evolution::Archive;
use crate::preference::ParticleSet;
use crate::to_value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairChoice {
    pub a: usize,
    pub b: usize,
    /// `min(p, 1 - p)` where `p` is the fraction of posterior draws preferring `a`.
    pub score: f64,
    /// No sampled pair showed any disagreement.
    pub degenerate: bool,
}

fn candidate_pairs<R: Rng + ?Sized>(n: usize, max_pairs: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let total = n * (n - 1) / 2;
    if total <= max_pairs {
        return (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    }
    let mut chosen = BTreeSet::new();
    while chosen.len() < max_pairs {
        chosen.insert(random_pair(n, rng));
    }
    chosen.into_iter().collect()
}

/// Uniformly random unordered pair `(i, j)` with `i < j`.
pub fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    assert!(n >= 2);
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i.min(j), i.max(j))
}

/// Archive pair the posterior disagrees about most. `None` with fewer than two entries.
pub fn select_pair<R: Rng + ?Sized>(
    ps: &ParticleSet,
    archive: &Archive,
    n_samples: usize,
    max_pairs: usize,
    rng: &mut R,
) -> Option<PairChoice> {
    let n = archive.len();
    if n < 2 {
        return None;
    }
    let pairs = candidate_pairs(n, max_pairs.max(1), rng);
    let draws = ps.sample(n_samples.max(1), rng);
    let values: Vec<Vec<f64>> = archive.entries().iter().map(|e| to_value(&e.f)).collect();
    // utilities[d][i] = w_d . v_i
    let utilities: Vec<Vec<f64>> = draws
        .iter()
        .map(|w| values.iter().map(|v| crate::dot(w, v)).collect())
        .collect();

    let mut best_score = f64::NEG_INFINITY;
    let mut tied: Vec<(usize, usize)> = Vec::new();
    for &(i, j) in &pairs {
        let prefer_i = utilities.iter().filter(|u| u[i] > u[j]).count();
        let p = prefer_i as f64 / draws.len() as f64;
        let score = p.min(1.0 - p);
        if score > best_score {
            best_score = score;
            tied.clear();
            tied.push((i, j));
        } else if score == best_score {
            tied.push((i, j));
        }
    }
    let (a, b) = tied[rng.random_range(0..tied.len())];
    Some(PairChoice {
        a,
        b,
        score: best_score,
        degenerate: best_score == 0.0,
    })
}

/// Objective with the largest posterior weight variance; ties go to the lowest index.
pub fn select_ia_dimension(ps: &ParticleSet) -> usize {
    let mut best = 0;
    let mut best_var = f64::NEG_INFINITY;
    for k in 0..ps.dim() {
        let v = ps.variance(k);
        if v > best_var {
            best = k;
            best_var = v;
        }
    }
    best
}
