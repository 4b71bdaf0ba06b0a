use std::f64::consts::FRAC_PI_2;

pub(crate) fn dtlz2(x: &[f64], m: usize) -> Vec<f64> {
    let g: f64 = x[m - 1..].iter().map(|v| (v - 0.5).powi(2)).sum();
    let scale = 1.0 + g;
    (0..m)
        .map(|i| {
            let mut f = scale;
            for &xj in &x[..m - 1 - i] {
                f *= (xj * FRAC_PI_2).cos();
            }
            if i > 0 {
                f *= (x[m - 1 - i] * FRAC_PI_2).sin();
            }
            f
        })
        .collect()
}
