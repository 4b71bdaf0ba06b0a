//! Slow, direct reference implementations used to check the library.
#![allow(dead_code)]

/// `f` weakly better everywhere and strictly better somewhere (minimization).
pub fn dominates(f: &[f64], g: &[f64]) -> bool {
    f.iter().zip(g).all(|(a, b)| a <= b) && f.iter().zip(g).any(|(a, b)| a < b)
}

/// Ranks by repeatedly peeling off the points no remaining point dominates.
pub fn peeling_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    let mut rank = vec![usize::MAX; n];
    let mut level = 0;
    let mut left = n;
    while left > 0 {
        let front: Vec<usize> = (0..n)
            .filter(|&i| rank[i] == usize::MAX)
            .filter(|&i| !(0..n).any(|j| rank[j] == usize::MAX && dominates(&points[j], &points[i])))
            .collect();
        for &i in &front {
            rank[i] = level;
        }
        left -= front.len();
        level += 1;
    }
    rank
}

pub enum Obs {
    Ps { a: Vec<f64>, b: Vec<f64>, prefers_a: bool },
    Ia { a: Vec<f64>, b: Vec<f64>, k: usize, delta: f64 },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Likelihood of one observation at weight `w`, written from the model definitions.
pub fn likelihood(obs: &Obs, w: &[f64], sigma_ps: f64, sigma_ia: f64, eps: f64) -> f64 {
    match obs {
        Obs::Ps { a, b, prefers_a } => {
            let gap = dot(w, a) - dot(w, b);
            let p_a = 1.0 / (1.0 + (-gap / sigma_ps).exp());
            if *prefers_a {
                p_a
            } else {
                1.0 - p_a
            }
        }
        Obs::Ia { a, b, k, delta } => {
            let mean = (dot(w, a) - dot(w, b)) / w[*k].max(eps);
            let z = (delta - mean) / sigma_ia;
            (-0.5 * z * z).exp() / (sigma_ia * (2.0 * std::f64::consts::PI).sqrt())
        }
    }
}

/// Normalized product of prior weights and likelihoods.
pub fn direct_posterior(particles: &[Vec<f64>], obs: &[Obs], sigma_ps: f64, sigma_ia: f64, eps: f64) -> Vec<f64> {
    let raw: Vec<f64> = particles
        .iter()
        .map(|w| obs.iter().map(|o| likelihood(o, w, sigma_ps, sigma_ia, eps)).product())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

fn h2(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Mutual information between the weight and a PS answer: `H(Y) - E_w H(Y | w)`.
pub fn exact_ps_information(particles: &[Vec<f64>], weights: &[f64], a: &[f64], b: &[f64], sigma_ps: f64) -> f64 {
    let p: Vec<f64> = particles
        .iter()
        .map(|w| 1.0 / (1.0 + (-(dot(w, a) - dot(w, b)) / sigma_ps).exp()))
        .collect();
    let p_a: f64 = p.iter().zip(weights).map(|(p, w)| p * w).sum();
    h2(p_a) - p.iter().zip(weights).map(|(p, w)| w * h2(*p)).sum::<f64>()
}

/// Regular grid of `n` points on the 1-simplex.
pub fn simplex_grid_2d(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            vec![t, 1.0 - t]
        })
        .collect()
}

/// Pearson chi-square statistic of observed counts against equal expectation.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

pub mod wfg {
    //! WFG4 / WFG9 built directly from the toolkit transformation definitions.
    use std::f64::consts::{FRAC_PI_2, PI};

    fn correct(v: f64) -> f64 {
        v.clamp(0.0, 1.0)
    }

    fn s_multi(y: f64, a: f64, b: f64, c: f64) -> f64 {
        let tmp1 = (y - c).abs() / (2.0 * ((c - y).floor() + c));
        let tmp2 = (4.0 * a + 2.0) * PI * (0.5 - tmp1);
        correct((1.0 + tmp2.cos() + 4.0 * b * tmp1.powi(2)) / (b + 2.0))
    }

    fn s_decept(y: f64, a: f64, b: f64, c: f64) -> f64 {
        let tmp1 = (y - a + b).floor() * (1.0 - c + (a - b) / b) / (a - b);
        let tmp2 = (a + b - y).floor() * (1.0 - c + (1.0 - a - b) / b) / (1.0 - a - b);
        correct(1.0 + ((y - a).abs() - b) * (tmp1 + tmp2 + 1.0 / b))
    }

    fn b_param(y: f64, u: f64, a: f64, b: f64, c: f64) -> f64 {
        let v = a - (1.0 - 2.0 * u) * ((0.5 - u).floor() + a).abs();
        correct(y.powf(b + (c - b) * v))
    }

    fn r_sum(y: &[f64], w: &[f64]) -> f64 {
        correct(y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>())
    }

    fn r_nonsep(y: &[f64], a: usize) -> f64 {
        let n = y.len();
        let mut num = 0.0;
        for j in 0..n {
            num += y[j];
            for k in 0..=a.saturating_sub(2) {
                num += (y[j] - y[(1 + j + k) % n]).abs();
            }
        }
        let ah = (a as f64 / 2.0).ceil();
        correct(num / (n as f64 / a as f64 * ah * (1.0 + 2.0 * a as f64 - 2.0 * ah)))
    }

    /// Toolkit concave shape `h_m` over the `M - 1` position values.
    fn concave(pos: &[f64], m: usize) -> f64 {
        let big_m = pos.len() + 1;
        let mut r = 1.0;
        for xi in &pos[..big_m - m] {
            r *= (xi * FRAC_PI_2).sin();
        }
        if m != 1 {
            r *= (pos[big_m - m] * FRAC_PI_2).cos();
        }
        r
    }

    /// Objectives with D = 1, S_m = 2m and all A_i = 1.
    fn shape(t: &[f64], m_obj: usize) -> Vec<f64> {
        let pos = &t[..m_obj - 1];
        (1..=m_obj).map(|m| t[m_obj - 1] + 2.0 * m as f64 * concave(pos, m)).collect()
    }

    fn normalized(z: &[f64]) -> Vec<f64> {
        z.iter().enumerate().map(|(i, v)| v / (2.0 * (i + 1) as f64)).collect()
    }

    pub fn wfg4(z: &[f64], m: usize, k: usize) -> Vec<f64> {
        let y: Vec<f64> = normalized(z).into_iter().map(|v| s_multi(v, 30.0, 10.0, 0.35)).collect();
        let g = k / (m - 1);
        let mut t: Vec<f64> = (0..m - 1).map(|i| r_sum(&y[i * g..(i + 1) * g], &vec![1.0; g])).collect();
        let l = z.len() - k;
        t.push(r_sum(&y[k..], &vec![1.0; l]));
        shape(&t, m)
    }

    pub fn wfg9(z: &[f64], m: usize, k: usize) -> Vec<f64> {
        let n = z.len();
        let y = normalized(z);
        let mut t1 = y.clone();
        for i in 0..n - 1 {
            let tail = &y[i + 1..];
            let u = r_sum(tail, &vec![1.0; tail.len()]);
            t1[i] = b_param(y[i], u, 0.98 / 49.98, 0.02, 50.0);
        }
        let t2: Vec<f64> = t1
            .iter()
            .enumerate()
            .map(|(i, &v)| if i < k { s_decept(v, 0.35, 0.001, 0.05) } else { s_multi(v, 30.0, 95.0, 0.35) })
            .collect();
        let g = k / (m - 1);
        let mut t3: Vec<f64> = (0..m - 1).map(|i| r_nonsep(&t2[i * g..(i + 1) * g], g)).collect();
        t3.push(r_nonsep(&t2[k..], n - k));
        shape(&t3, m)
    }
}
