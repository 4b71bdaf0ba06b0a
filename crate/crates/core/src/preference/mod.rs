//! Weighted-particle posterior over simplex weights.
//!
//! Particles are drawn once from a Dirichlet prior and never move; each
//! observation multiplies the weights by its likelihood (in log space). When
//! the effective sample size falls below a fraction of `S` the set is
//! resampled multinomially and the weights reset to uniform.

mod likelihood;
mod query;

pub use likelihood::{fisher_info_ia, fisher_info_ps, ia_mean, log_sigmoid, ps_likelihood, sigmoid, NoiseModel};
pub use query::{Observation, Query, QueryKind, QueryRecord};

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Gamma;
use serde::{Deserialize, Serialize};

use likelihood::utility_gap;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Resampling {
    Disabled,
    /// Resample when `ESS < fraction * S`.
    Ess { fraction: f64 },
}

impl Default for Resampling {
    fn default() -> Self {
        Resampling::Ess { fraction: 0.5 }
    }
}

/// What happened during one committed update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateOutcome {
    pub resampled: bool,
    /// Every likelihood underflowed; weights were reset to uniform.
    pub degenerate: bool,
    /// ESS right after reweighting, before any resampling.
    pub ess_after_reweight: f64,
}

/// Posterior digest written to run traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub entropy: f64,
    pub support_entropy: f64,
    pub ess: f64,
    pub unique_particles: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticleSet {
    m: usize,
    /// Row-major `S x m`.
    particles: Vec<f64>,
    weights: Vec<f64>,
    history: Vec<QueryRecord>,
    resampling: Resampling,
    resample_count: usize,
}

/// Shannon entropy (nats) of a normalized weight vector.
pub fn weight_entropy(weights: &[f64]) -> f64 {
    -weights.iter().filter(|&&w| w > 0.0).map(|&w| w * w.ln()).sum::<f64>()
}

/// Normalize `log_weights` by a max shift; `None` if nothing is finite.
fn normalize_log(log_weights: &[f64]) -> Option<Vec<f64>> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let mut w: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return None;
    }
    w.iter_mut().for_each(|v| *v /= total);
    Some(w)
}

impl ParticleSet {
    /// `s` i.i.d. draws from `Dir(alpha)` with uniform weights.
    pub fn init<R: Rng + ?Sized>(m: usize, s: usize, alpha: &[f64], rng: &mut R) -> Result<Self> {
        if s == 0 || m == 0 {
            return Err(Error::Config("particle set needs S >= 1 and m >= 1".into()));
        }
        if alpha.len() != m {
            return Err(Error::Shape {
                expected: m,
                actual: alpha.len(),
            });
        }
        let gammas = alpha
            .iter()
            .map(|&a| Gamma::new(a, 1.0).map_err(|_| Error::Config(format!("Dirichlet concentration must be > 0, got {a}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut particles = Vec::with_capacity(s * m);
        for _ in 0..s {
            loop {
                let draw: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
                let total: f64 = draw.iter().sum();
                if total > 0.0 {
                    particles.extend(draw.iter().map(|v| v / total));
                    break;
                }
            }
        }
        Ok(ParticleSet {
            m,
            particles,
            weights: vec![1.0 / s as f64; s],
            history: Vec::new(),
            resampling: Resampling::default(),
            resample_count: 0,
        })
    }

    /// A set on a given support, with uniform weights unless `weights` is given.
    pub fn from_particles(support: &[Vec<f64>], weights: Option<Vec<f64>>) -> Result<Self> {
        let s = support.len();
        let m = support.first().map_or(0, Vec::len);
        if s == 0 || m == 0 {
            return Err(Error::Config("empty particle support".into()));
        }
        let mut particles = Vec::with_capacity(s * m);
        for p in support {
            if p.len() != m {
                return Err(Error::Shape {
                    expected: m,
                    actual: p.len(),
                });
            }
            particles.extend_from_slice(p);
        }
        let weights = match weights {
            Some(w) if w.len() != s => {
                return Err(Error::Shape {
                    expected: s,
                    actual: w.len(),
                })
            }
            Some(w) => {
                let total: f64 = w.iter().sum();
                w.into_iter().map(|v| v / total).collect()
            }
            None => vec![1.0 / s as f64; s],
        };
        Ok(ParticleSet {
            m,
            particles,
            weights,
            history: Vec::new(),
            resampling: Resampling::default(),
            resample_count: 0,
        })
    }

    pub fn with_resampling(mut self, resampling: Resampling) -> Self {
        self.resampling = resampling;
        self
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn particle(&self, s: usize) -> &[f64] {
        &self.particles[s * self.m..(s + 1) * self.m]
    }

    pub fn particles(&self) -> impl Iterator<Item = &[f64]> {
        self.particles.chunks_exact(self.m)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn history(&self) -> &[QueryRecord] {
        &self.history
    }

    pub fn resample_count(&self) -> usize {
        self.resample_count
    }

    /// Per-particle utility gaps `w·(a - b)`.
    pub fn gaps(&self, a_value: &[f64], b_value: &[f64]) -> Vec<f64> {
        self.particles().map(|w| utility_gap(a_value, b_value, w)).collect()
    }

    /// Log-likelihood of `obs` at every particle (up to a shared constant).
    pub fn log_likelihoods(&self, obs: &Observation, noise: &NoiseModel) -> Vec<f64> {
        match obs {
            Observation::Ps {
                a_value,
                b_value,
                prefers_a,
            } => {
                let sign = if *prefers_a { 1.0 } else { -1.0 };
                let beta = noise.beta();
                self.particles()
                    .map(|w| log_sigmoid(sign * beta * utility_gap(a_value, b_value, w)))
                    .collect()
            }
            Observation::Ia {
                a_value,
                b_value,
                dim,
                delta,
            } => {
                let two_var = 2.0 * noise.sigma_ia * noise.sigma_ia;
                self.particles()
                    .map(|w| {
                        let mu = ia_mean(a_value, b_value, w, *dim, noise.eps);
                        -(delta - mu).powi(2) / two_var
                    })
                    .collect()
            }
        }
    }

    /// Weights after multiplying by `exp(log_lik)`; the set itself is untouched.
    /// Returns the uniform vector and `true` when every term underflows.
    pub fn reweight_log(&self, log_lik: &[f64]) -> (Vec<f64>, bool) {
        let combined: Vec<f64> = self.weights.iter().zip(log_lik).map(|(w, l)| w.ln() + l).collect();
        match normalize_log(&combined) {
            Some(w) => (w, false),
            None => (vec![1.0 / self.len() as f64; self.len()], true),
        }
    }

    /// Temporary posterior weights given `obs` (no resampling, no history).
    pub fn reweighted(&self, obs: &Observation, noise: &NoiseModel) -> (Vec<f64>, bool) {
        self.reweight_log(&self.log_likelihoods(obs, noise))
    }

    /// Commit an observation: reweight, record it, and resample if the ESS is low.
    pub fn update<R: Rng + ?Sized>(&mut self, record: QueryRecord, noise: &NoiseModel, rng: &mut R) -> UpdateOutcome {
        let (weights, degenerate) = self.reweighted(&record.observation, noise);
        self.weights = weights;
        self.history.push(record);
        let ess = self.ess();
        let mut outcome = UpdateOutcome {
            resampled: false,
            degenerate,
            ess_after_reweight: ess,
        };
        if let Resampling::Ess { fraction } = self.resampling {
            if ess < fraction * self.len() as f64 {
                self.resample(rng);
                outcome.resampled = true;
            }
        }
        outcome
    }

    /// Multinomial resampling with replacement; weights reset to uniform.
    pub fn resample<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let s = self.len();
        let Ok(index) = WeightedIndex::new(&self.weights) else {
            self.weights = vec![1.0 / s as f64; s];
            return;
        };
        let mut particles = Vec::with_capacity(self.particles.len());
        for _ in 0..s {
            particles.extend_from_slice(self.particle(index.sample(rng)));
        }
        self.particles = particles;
        self.weights = vec![1.0 / s as f64; s];
        self.resample_count += 1;
    }

    pub fn entropy(&self) -> f64 {
        weight_entropy(&self.weights)
    }

    pub fn ess(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.m];
        for (p, w) in self.particles().zip(&self.weights) {
            for (acc, v) in mean.iter_mut().zip(p) {
                *acc += w * v;
            }
        }
        mean
    }

    pub fn variance(&self, k: usize) -> f64 {
        let mu: f64 = self.particles().zip(&self.weights).map(|(p, w)| w * p[k]).sum();
        self.particles().zip(&self.weights).map(|(p, w)| w * (p[k] - mu).powi(2)).sum()
    }

    /// Indices drawn with replacement proportional to weight.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        match WeightedIndex::new(&self.weights) {
            Ok(index) => (0..n).map(|_| index.sample(rng)).collect(),
            Err(_) => (0..n).map(|_| rng.random_range(0..self.len())).collect(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        self.sample_indices(n, rng).into_iter().map(|s| self.particle(s).to_vec()).collect()
    }

    /// Posterior expected utility of objective vector `f`, via the posterior mean.
    pub fn expected_utility(&self, f: &[f64]) -> f64 {
        crate::utility(f, &self.mean())
    }

    /// Total weight per distinct particle location, in a fixed order.
    fn support_masses(&self) -> Vec<f64> {
        let mut masses: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (p, &w) in self.particles().zip(&self.weights) {
            *masses.entry(p.iter().map(|v| v.to_bits()).collect()).or_default() += w;
        }
        masses.into_values().collect()
    }

    pub fn unique_particles(&self) -> usize {
        self.support_masses().len()
    }

    /// Entropy of the weight mass merged over identical particles.
    ///
    /// Unlike [`entropy`](Self::entropy) this does not jump back to `ln S`
    /// after resampling, since duplicated particles count as one hypothesis.
    pub fn support_entropy(&self) -> f64 {
        weight_entropy(&self.support_masses())
    }

    pub fn summary(&self) -> PosteriorSummary {
        PosteriorSummary {
            mean: self.mean(),
            variance: (0..self.m).map(|k| self.variance(k)).collect(),
            entropy: self.entropy(),
            support_entropy: self.support_entropy(),
            ess: self.ess(),
            unique_particles: self.unique_particles(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn noise() -> NoiseModel {
        NoiseModel::default()
    }

    fn ps_record(a: &[f64], b: &[f64], y: bool) -> QueryRecord {
        QueryRecord {
            observation: Observation::Ps {
                a_value: a.to_vec(),
                b_value: b.to_vec(),
                prefers_a: y,
            },
            cost_paid: 1.0,
        }
    }

    fn grid(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) / n as f64;
                vec![t, 1.0 - t]
            })
            .collect()
    }

    #[test]
    fn single_particle() {
        let mut rng = stream(1, Stream::Particles);
        let ps = ParticleSet::init(3, 1, &[1.0; 3], &mut rng).unwrap();
        assert_eq!(ps.weights(), &[1.0]);
        assert_eq!(ps.entropy(), 0.0);
        assert_eq!(ps.mean(), ps.particle(0).to_vec());
        assert_eq!(ps.variance(1), 0.0);
    }

    #[test]
    fn particles_on_simplex() {
        let mut rng = stream(2, Stream::Particles);
        let ps = ParticleSet::init(5, 500, &[0.5, 1.0, 2.0, 1.0, 3.0], &mut rng).unwrap();
        for p in ps.particles() {
            assert!(p.iter().all(|v| *v >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(ParticleSet::init(2, 10, &[1.0, 0.0], &mut rng).is_err());
    }

    #[test]
    fn dirichlet_moments() {
        let mut rng = stream(3, Stream::Particles);
        let m = 3;
        let s = 2048;
        let ps = ParticleSet::init(m, s, &[1.0; 3], &mut rng).unwrap();
        // Dir(1,1,1) marginal variance: (1/3)(2/3)/4
        let se = ((1.0 / 3.0) * (2.0 / 3.0) / 4.0 / s as f64).sqrt();
        for (k, mean) in ps.mean().iter().enumerate() {
            assert!((mean - 1.0 / 3.0).abs() < 3.0 * se, "coordinate {k}: {mean}");
        }
    }

    #[test]
    fn dirichlet_two_dim_marginal_is_uniform() {
        let mut rng = stream(4, Stream::Particles);
        let n = 5000;
        let ps = ParticleSet::init(2, n, &[1.0, 1.0], &mut rng).unwrap();
        let mut xs: Vec<f64> = ps.particles().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - x).abs()))
            .fold(0.0, f64::max);
        // KS critical value at level 0.01
        assert!(d < 1.628 / (n as f64).sqrt(), "KS {d}");
    }

    #[test]
    fn uninformative_ps_leaves_weights() {
        let mut rng = stream(5, Stream::Resampling);
        let mut ps = ParticleSet::from_particles(&grid(20), None).unwrap();
        let before = ps.weights().to_vec();
        ps.update(ps_record(&[-0.4, -0.6], &[-0.4, -0.6], true), &noise(), &mut rng);
        for (a, b) in before.iter().zip(ps.weights()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(ps.history().len(), 1);
    }

    #[test]
    fn matches_grid_bayes() {
        let mut rng = stream(6, Stream::Resampling);
        let support = grid(20);
        let mut ps = ParticleSet::from_particles(&support, None).unwrap();
        let (a, b) = ([-0.2, -0.9], [-0.7, -0.3]);
        ps.update(ps_record(&a, &b, false), &noise(), &mut rng);
        let lik: Vec<f64> = support
            .iter()
            .map(|w| {
                let gap = w[0] * (a[0] - b[0]) + w[1] * (a[1] - b[1]);
                1.0 - 1.0 / (1.0 + (-gap / 0.15f64).exp())
            })
            .collect();
        let total: f64 = lik.iter().sum();
        for (p, q) in ps.weights().iter().zip(&lik) {
            assert!((p - q / total).abs() < 1e-12);
        }
    }

    #[test]
    fn repeated_evidence_triggers_resampling() {
        let mut rng = stream(7, Stream::Resampling);
        let mut ps = ParticleSet::init(2, 400, &[1.0, 1.0], &mut rng).unwrap();
        let record = ps_record(&[-1.0, 0.0], &[0.0, -1.0], true);
        let mut last = ps.ess();
        let mut fired = false;
        for _ in 0..50 {
            let out = ps.update(record.clone(), &noise(), &mut rng);
            if out.resampled {
                assert!(out.ess_after_reweight < 0.5 * 400.0);
                assert!((ps.ess() - 400.0).abs() < 1e-9);
                assert!((ps.entropy() - 400f64.ln()).abs() < 1e-9);
                fired = true;
                break;
            }
            assert!(ps.ess() < last);
            last = ps.ess();
        }
        assert!(fired);
        assert!(ps.unique_particles() < 400);
        assert!(ps.support_entropy() < 400f64.ln());
    }

    #[test]
    fn underflow_falls_back_to_uniform() {
        let mut rng = stream(8, Stream::Resampling);
        let mut ps = ParticleSet::from_particles(&[vec![1.0, 0.0], vec![0.9, 0.1]], None).unwrap();
        let obs = QueryRecord {
            observation: Observation::Ia {
                a_value: vec![0.0, 0.0],
                b_value: vec![0.0, 0.0],
                dim: 0,
                delta: 1e200,
            },
            cost_paid: 1.15,
        };
        let out = ps.update(obs, &noise(), &mut rng);
        assert!(out.degenerate);
        assert_eq!(ps.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn entropy_examples() {
        let ps = ParticleSet::from_particles(&grid(8), None).unwrap();
        assert!((ps.entropy() - 8f64.ln()).abs() < 1e-12);
        let ps = ParticleSet::from_particles(&grid(4), Some(vec![0.5, 0.5, 0.0, 0.0])).unwrap();
        assert!((ps.entropy() - 2f64.ln()).abs() < 1e-12);
        let ps = ParticleSet::from_particles(&grid(4), Some(vec![0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(ps.entropy(), 0.0);
    }

    #[test]
    fn summaries() {
        let ps = ParticleSet::from_particles(&[vec![1.0, 0.0], vec![0.0, 1.0]], None).unwrap();
        assert_eq!(ps.mean(), vec![0.5, 0.5]);
        assert!((ps.variance(0) - 0.25).abs() < 1e-15);
        // uniform posterior over m=2, f=(1,3)
        assert!((ps.expected_utility(&[1.0, 3.0]) + 2.0).abs() < 1e-15);
        assert_eq!(ps.expected_utility(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn expected_utility_matches_particle_sum() {
        let mut rng = stream(9, Stream::Particles);
        let mut ps = ParticleSet::init(3, 300, &[1.0; 3], &mut rng).unwrap();
        ps.update(ps_record(&[-0.1, -0.5, -0.9], &[-0.6, -0.4, -0.2], true), &noise(), &mut rng);
        let f = [0.3, 1.2, 0.7];
        let direct: f64 = ps.particles().zip(ps.weights()).map(|(w, om)| om * crate::utility(&f, w)).sum();
        assert!((ps.expected_utility(&f) - direct).abs() < 1e-12);
    }

    #[test]
    fn sample_mean_is_consistent() {
        let mut rng = stream(10, Stream::Particles);
        let mut ps = ParticleSet::init(3, 256, &[1.0; 3], &mut rng).unwrap();
        ps.update(ps_record(&[-0.2, -0.8, -0.5], &[-0.7, -0.1, -0.5], false), &noise(), &mut rng);
        let n = 100_000;
        let draws = ps.sample(n, &mut rng);
        let mean = ps.mean();
        for k in 0..3 {
            let emp = draws.iter().map(|d| d[k]).sum::<f64>() / n as f64;
            let se = (ps.variance(k) / n as f64).sqrt();
            assert!((emp - mean[k]).abs() < 3.0 * se, "k={k} {emp} vs {}", mean[k]);
        }
    }
}
