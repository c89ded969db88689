//! Small numerical helpers shared across modules.

use statrs::function::erf::erfc;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    // unwrap: N(0, 1) parameters are always valid.
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

/// Composite Simpson rule on `[a, b]` with `intervals` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// Tensor-product midpoint rule over the box `[lo_k, hi_k]`, `per_dim` nodes per axis.
pub fn midpoint_box<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    lo: &[f64],
    hi: &[f64],
    per_dim: usize,
) -> f64 {
    let dim = lo.len();
    let steps: Vec<f64> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| (b - a) / per_dim as f64)
        .collect();
    let cell: f64 = steps.iter().product();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let mut acc = 0.0;
    loop {
        for k in 0..dim {
            point[k] = lo[k] + (idx[k] as f64 + 0.5) * steps[k];
        }
        acc += f(&point);
        let mut k = 0;
        loop {
            if k == dim {
                return acc * cell;
            }
            idx[k] += 1;
            if idx[k] < per_dim {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Nodes per axis used for box quadrature in dimension `dim`.
pub fn nodes_per_dim(dim: usize) -> usize {
    match dim {
        0 | 1 => 20_001,
        2 => 601,
        _ => 101,
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Mean and (population) variance of a weighted 1-d sample.
pub fn weighted_moments(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let mut m0 = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (x, w) in points {
        m0 += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    let mean = m1 / m0;
    (mean, (m2 / m0 - mean * mean).max(0.0))
}

/// Formats with 12 significant digits in scientific notation.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.11e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_cubic_exactly() {
        let v = simpson(|x| x * x * x + x, 0.0, 2.0, 4);
        assert!((v - 6.0).abs() < 1e-12);
    }

    #[test]
    fn midpoint_box_unit_square() {
        let v = midpoint_box(|p| p[0] + p[1], &[0.0, 0.0], &[1.0, 1.0], 50);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_quantile_roundtrip() {
        for p in [1e-6, 0.1, 0.5, 0.9] {
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-10);
        }
    }
}
