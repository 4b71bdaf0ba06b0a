use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::ProblemSpec;
use crate::{Error, Result};

/// Deterministic grid over the analytic Pareto front.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontSample {
    pub points: Vec<Vec<f64>>,
    pub resolution: usize,
}

impl FrontSample {
    /// Best linear utility `max_f -w·f` over the sampled points.
    pub fn optimal_utility(&self, w: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|f| crate::utility(f, w))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Visit every grid point: `m - 1` angles on a regular grid over `[0, pi/2]`,
/// mapped to the positive unit sphere and scaled by the front radii.
pub fn for_each_front_point(spec: &ProblemSpec, resolution: usize, mut visit: impl FnMut(&[f64])) -> Result<()> {
    if resolution < 2 {
        return Err(Error::Config(format!("front resolution must be >= 2, got {resolution}")));
    }
    let m = spec.m;
    let radii = spec.front_radii();
    let step = 1.0 / (resolution - 1) as f64;
    let trig: Vec<(f64, f64)> = (0..resolution)
        .map(|j| {
            let angle = if j + 1 == resolution { FRAC_PI_2 } else { j as f64 * step * FRAC_PI_2 };
            (angle.cos(), angle.sin())
        })
        .collect();
    let mut index = vec![0usize; m - 1];
    let mut point = vec![0.0; m];
    loop {
        // f_i uses the same chain as DTLZ2: cosines of the leading angles, then one sine.
        for i in 0..m {
            let mut v = radii[i];
            for &a in &index[..m - 1 - i] {
                v *= trig[a].0;
            }
            if i > 0 {
                v *= trig[index[m - 1 - i]].1;
            }
            point[i] = v;
        }
        visit(&point);

        let mut axis = 0;
        loop {
            if axis == m - 1 {
                return Ok(());
            }
            index[axis] += 1;
            if index[axis] < resolution {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}

pub fn sample_front(spec: &ProblemSpec, resolution: usize) -> Result<FrontSample> {
    let mut points = Vec::with_capacity(resolution.pow(spec.m as u32 - 1));
    for_each_front_point(spec, resolution, |p| points.push(p.to_vec()))?;
    Ok(FrontSample { points, resolution })
}

/// `max` over the front grid of `-w·f`, without materializing the grid.
pub fn front_optimal_utility(spec: &ProblemSpec, w: &[f64], resolution: usize) -> Result<f64> {
    if w.len() != spec.m {
        return Err(Error::Shape {
            expected: spec.m,
            actual: w.len(),
        });
    }
    let mut best = f64::NEG_INFINITY;
    for_each_front_point(spec, resolution, |p| best = best.max(crate::utility(p, w)))?;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(name: &str) -> ProblemSpec {
        name.parse().unwrap()
    }

    fn contains(sample: &FrontSample, target: &[f64]) -> bool {
        sample
            .points
            .iter()
            .any(|p| p.iter().zip(target).all(|(a, b)| (a - b).abs() < 1e-12))
    }

    #[test]
    fn includes_axis_vertices() {
        let s = sample_front(&spec("dtlz2-3"), 2).unwrap();
        assert_eq!(s.points.len(), 4);
        for v in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            assert!(contains(&s, &v), "missing {v:?}");
        }
        let s = sample_front(&spec("wfg4-3"), 2).unwrap();
        for v in [[2.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 6.0]] {
            assert!(contains(&s, &v), "missing {v:?}");
        }
    }

    #[test]
    fn points_lie_on_surface() {
        for (name, res) in [("dtlz2-3", 64), ("dtlz2-5", 6), ("wfg9-3", 64)] {
            let spec = spec(name);
            let radii = spec.front_radii();
            let s = sample_front(&spec, res).unwrap();
            assert_eq!(s.points.len(), res.pow(spec.m as u32 - 1));
            for p in &s.points {
                let r: f64 = p.iter().zip(&radii).map(|(f, r)| (f / r).powi(2)).sum();
                assert!((r - 1.0).abs() < 1e-9);
                assert!(p.iter().all(|v| *v >= 0.0));
            }
        }
    }

    #[test]
    fn sampled_points_mutually_nondominated() {
        let s = sample_front(&spec("wfg4-3"), 9).unwrap();
        for a in &s.points {
            for b in &s.points {
                let dominates = a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y);
                assert!(!dominates, "{a:?} dominates {b:?}");
            }
        }
    }

    #[test]
    fn zero_weight_dimensions_ignored() {
        let u = front_optimal_utility(&spec("dtlz2-3"), &[1.0, 0.0, 0.0], 16).unwrap();
        assert!(u.abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_optimum_at_vertex() {
        let w = [1.0 / 3.0; 3];
        let u = front_optimal_utility(&spec("dtlz2-3"), &w, 256).unwrap();
        // brute force over the full grid agrees with the vertex value
        let s = sample_front(&spec("dtlz2-3"), 256).unwrap();
        assert_eq!(s.optimal_utility(&w), u);
        assert!((u + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn wfg9_reference_weight() {
        let w = [0.2, 0.3, 0.5];
        let u = front_optimal_utility(&spec("wfg9-3"), &w, 256).unwrap();
        // the concave front's linear optimum is the vertex minimizing w_i r_i = min(0.4, 1.2, 3.0)
        assert!((u + 0.4).abs() < 1e-12, "{u}");
    }

    #[test]
    fn finer_grid_never_lowers_optimum() {
        let w = [0.25, 0.35, 0.4];
        let mut last = f64::NEG_INFINITY;
        for res in [2, 3, 5, 9, 17, 33] {
            let u = front_optimal_utility(&spec("wfg4-3"), &w, res).unwrap();
            assert!(u >= last);
            last = u;
        }
    }
}
