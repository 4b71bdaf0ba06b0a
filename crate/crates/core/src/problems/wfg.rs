//! WFG4 and WFG9 with concave shape functions.
//!
//! Decision variable `i` (1-indexed) lives in `[0, 2i]`; the first `k` are
//! position parameters and the remaining `l = n - k` distance parameters.
//! Distance scaling is `D = 1`, shape scaling `S_i = 2i` and all degeneracy
//! constants are 1.

use std::f64::consts::{FRAC_PI_2, PI};

use super::ProblemName;

const WFG9_A: f64 = 0.98 / 49.98;
const WFG9_B: f64 = 0.02;
const WFG9_C: f64 = 50.0;

fn clamp01(y: f64) -> f64 {
    y.clamp(0.0, 1.0)
}

fn normalize(z: &[f64]) -> Vec<f64> {
    z.iter().enumerate().map(|(i, v)| clamp01(v / (2.0 * (i + 1) as f64))).collect()
}

fn s_multi(y: f64, a: f64, b: f64, c: f64) -> f64 {
    let t = (y - c).abs() / (2.0 * ((c - y).floor() + c));
    let angle = (4.0 * a + 2.0) * PI * (0.5 - t);
    clamp01((1.0 + angle.cos() + 4.0 * b * t * t) / (b + 2.0))
}

fn s_decept(y: f64, a: f64, b: f64, c: f64) -> f64 {
    let low = (y - a + b).floor() * (1.0 - c + (a - b) / b) / (a - b);
    let high = (a + b - y).floor() * (1.0 - c + (1.0 - a - b) / b) / (1.0 - a - b);
    clamp01(1.0 + ((y - a).abs() - b) * (low + high + 1.0 / b))
}

fn b_param(y: f64, u: f64, a: f64, b: f64, c: f64) -> f64 {
    let v = a - (1.0 - 2.0 * u) * ((0.5 - u).floor() + a).abs();
    clamp01(y.powf(b + (c - b) * v))
}

fn r_sum(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

fn r_nonsep(y: &[f64], a: usize) -> f64 {
    let n = y.len();
    let mut numerator = 0.0;
    for j in 0..n {
        numerator += y[j];
        for k in 0..a.saturating_sub(1) {
            numerator += (y[j] - y[(j + k + 1) % n]).abs();
        }
    }
    let half = (a as f64 / 2.0).ceil();
    let denominator = n as f64 * half * (1.0 + 2.0 * a as f64 - 2.0 * half) / a as f64;
    clamp01(numerator / denominator)
}

/// Concave shape `h_1..h_M` of the position vector `x` (length `M - 1`).
fn concave(x: &[f64]) -> Vec<f64> {
    let m = x.len() + 1;
    (1..=m)
        .map(|i| {
            let mut h = 1.0;
            for &xj in &x[..m - i] {
                h *= (xj * FRAC_PI_2).sin();
            }
            if i > 1 {
                h *= (x[m - i] * FRAC_PI_2).cos();
            }
            h
        })
        .collect()
}

/// Final objectives from reduced parameters `t` (length `M`).
fn objectives(t: &[f64]) -> Vec<f64> {
    let m = t.len();
    let distance = t[m - 1];
    // With unit degeneracy constants max(t_M, 1) = 1, so x_i = t_i.
    let h = concave(&t[..m - 1]);
    h.iter().enumerate().map(|(i, hi)| distance + 2.0 * (i + 1) as f64 * hi).collect()
}

fn grouped(y: &[f64], m: usize, k: usize, reduce: impl Fn(&[f64]) -> f64, tail: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let group = k / (m - 1);
    let mut t: Vec<f64> = (0..m - 1).map(|i| reduce(&y[i * group..(i + 1) * group])).collect();
    t.push(tail(&y[k..]));
    t
}

pub(crate) fn wfg4(z: &[f64], m: usize, k: usize) -> Vec<f64> {
    let y: Vec<f64> = normalize(z).into_iter().map(|v| s_multi(v, 30.0, 10.0, 0.35)).collect();
    objectives(&grouped(&y, m, k, r_sum, r_sum))
}

pub(crate) fn wfg9(z: &[f64], m: usize, k: usize) -> Vec<f64> {
    let n = z.len();
    let y0 = normalize(z);
    let mut y = y0.clone();
    for i in 0..n - 1 {
        let u = r_sum(&y0[i + 1..]);
        y[i] = b_param(y0[i], u, WFG9_A, WFG9_B, WFG9_C);
    }
    for (i, v) in y.iter_mut().enumerate() {
        *v = if i < k {
            s_decept(*v, 0.35, 0.001, 0.05)
        } else {
            s_multi(*v, 30.0, 95.0, 0.35)
        };
    }
    let l = n - k;
    let group = k / (m - 1);
    objectives(&grouped(&y, m, k, |g| r_nonsep(g, group), |g| r_nonsep(g, l)))
}

/// Pareto-optimal decision vector with the given position parameters in `[0, 1]`.
///
/// The first `k` variables are spread evenly over the `M - 1` position values.
pub(crate) fn optimal_point(name: ProblemName, position: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let group = k / (m - 1);
    let mut y = vec![0.35; n];
    for i in 0..k {
        y[i] = position[(i / group).min(m - 2)];
    }
    if name == ProblemName::Wfg9 {
        // Invert the parameter-dependent bias so every biased distance variable lands on 0.35.
        for i in (k..n - 1).rev() {
            let u = r_sum(&y[i + 1..]);
            let v = WFG9_A - (1.0 - 2.0 * u) * ((0.5 - u).floor() + WFG9_A).abs();
            let exponent = WFG9_B + (WFG9_C - WFG9_B) * v;
            y[i] = 0.35f64.powf(1.0 / exponent);
        }
    }
    y.iter().enumerate().map(|(i, v)| (v * 2.0 * (i + 1) as f64).min(2.0 * (i + 1) as f64)).collect()
}
