use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{DecisionMaker, DmReply, PosedQuery};
use crate::preference::{ia_mean, ps_likelihood, NoiseModel, ParticleSet, Query};
use crate::rng::RunRng;
use crate::Result;

/// Simulated DM answering from fixed weights with the same noise model the posterior assumes.
#[derive(Debug, Clone)]
pub struct SyntheticDm {
    w_star: Vec<f64>,
    noise: NoiseModel,
    rng: RunRng,
}

impl SyntheticDm {
    pub fn new(w_star: Vec<f64>, noise: NoiseModel, rng: RunRng) -> Self {
        SyntheticDm { w_star, noise, rng }
    }

    /// Draw `w*` from `Dir(1, ..., 1)`.
    pub fn sample_weights(m: usize, rng: &mut RunRng) -> Result<Vec<f64>> {
        let one = ParticleSet::init(m, 1, &vec![1.0; m], rng)?;
        Ok(one.particle(0).to_vec())
    }

    pub fn w_star(&self) -> &[f64] {
        &self.w_star
    }

    pub fn preference_probability(&self, a_value: &[f64], b_value: &[f64]) -> f64 {
        ps_likelihood(a_value, b_value, &self.w_star, self.noise.beta())
    }

    pub fn answer_ps(&mut self, a_value: &[f64], b_value: &[f64]) -> bool {
        let p = self.preference_probability(a_value, b_value);
        self.rng.random::<f64>() < p
    }

    pub fn answer_ia(&mut self, a_value: &[f64], b_value: &[f64], k: usize) -> f64 {
        let mu = ia_mean(a_value, b_value, &self.w_star, k, self.noise.eps);
        Normal::new(mu, self.noise.sigma_ia)
            .map(|n| n.sample(&mut self.rng))
            .unwrap_or(mu)
    }
}

impl DecisionMaker for SyntheticDm {
    fn answer(&mut self, posed: &PosedQuery) -> DmReply {
        match &posed.query {
            Query::Ps { a_value, b_value } => DmReply::Preference(self.answer_ps(a_value, b_value)),
            Query::Ia { a_value, b_value, dim } => DmReply::Adjustment(self.answer_ia(a_value, b_value, *dim)),
        }
    }

    fn ground_truth(&self) -> Option<Vec<f64>> {
        Some(self.w_star.clone())
    }
}
