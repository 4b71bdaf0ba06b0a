use std::cmp::Ordering;

use rand::Rng;

use super::{assign_rank_and_crowding, polynomial_mutation, sbx_crossover, Archive, Bounds, Individual, Variation};

/// Survivors of one environmental-selection pass.
#[derive(Debug, Clone)]
pub struct Selected {
    pub survivors: Vec<Individual>,
    /// Fewer evaluated individuals than the target size were available.
    pub short: bool,
}

fn by_rank_then_crowding(a: &Individual, b: &Individual) -> Ordering {
    a.rank
        .cmp(&b.rank)
        .then_with(|| b.crowding.unwrap_or(0.0).total_cmp(&a.crowding.unwrap_or(0.0)))
}

/// Combine parents and offspring and keep the best `n` by rank, then crowding distance.
///
/// Crowding is computed once per front over all its members; the truncated
/// front keeps its most isolated points.
pub fn environmental_selection(parents: Vec<Individual>, offspring: Vec<Individual>, n: usize) -> Selected {
    let mut pool: Vec<Individual> = parents.into_iter().chain(offspring).filter(|i| i.f.is_some()).collect();
    let short = pool.len() < n;
    let objectives: Vec<&[f64]> = pool.iter().map(|i| i.f.as_deref().unwrap_or(&[])).collect();
    let (ranks, crowding) = assign_rank_and_crowding(&objectives);
    for ((ind, r), c) in pool.iter_mut().zip(ranks).zip(crowding) {
        ind.rank = Some(r);
        ind.crowding = Some(c);
    }
    // stable sort keeps insertion order among exact ties
    pool.sort_by(by_rank_then_crowding);
    pool.truncate(n);
    Selected { survivors: pool, short }
}

fn tournament<'a, R: Rng + ?Sized>(pop: &'a [Individual], rng: &mut R) -> &'a Individual {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    match by_rank_then_crowding(a, b) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if rng.random_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

/// Produce `count` candidate designs via binary tournament, SBX and polynomial mutation.
///
/// Children that exactly match an archived design are mutated once more.
pub fn generate_offspring<R: Rng + ?Sized>(
    population: &[Individual],
    count: usize,
    bounds: &Bounds,
    params: &Variation,
    archive: Option<&Archive>,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    if count == 0 || population.is_empty() {
        return Vec::new();
    }
    let mut ranked = population.to_vec();
    if ranked.iter().all(|i| i.f.is_some()) {
        let objectives: Vec<&[f64]> = ranked.iter().map(|i| i.f.as_deref().unwrap_or(&[])).collect();
        let (ranks, crowding) = assign_rank_and_crowding(&objectives);
        for ((ind, r), c) in ranked.iter_mut().zip(ranks).zip(crowding) {
            ind.rank = Some(r);
            ind.crowding = Some(c);
        }
    }
    let prob = params.mutation_prob.unwrap_or(1.0 / bounds.dim().max(1) as f64);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p1 = tournament(&ranked, rng);
        let p2 = tournament(&ranked, rng);
        let (c1, c2) = sbx_crossover(&p1.x, &p2.x, bounds, params, rng);
        for child in [c1, c2] {
            if out.len() == count {
                break;
            }
            let mut child = polynomial_mutation(&child, bounds, params.eta_m, prob, rng);
            if archive.is_some_and(|a| a.contains(&child)) {
                child = polynomial_mutation(&child, bounds, params.eta_m, prob, rng);
            }
            out.push(child);
        }
    }
    out
}
