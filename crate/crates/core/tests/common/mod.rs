//! Oracles shared by the integration tests and the acceptance suite. None of
//! them call into the code paths they check.
#![allow(dead_code)]

use filterlab::measures::{DiscreteMeasure, GridSpec};
use filterlab::models::ArKernel;
use rand::Rng;

/// Standard normal CDF from statrs, independent of the crate's own.
pub fn phi(x: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// `‖N(m1, s²) − N(m2, s²)‖_TV = 2(2Φ(|Δ|/2s) − 1)`.
pub fn tv_same_variance(m1: f64, m2: f64, s: f64) -> f64 {
    2.0 * (2.0 * phi((m1 - m2).abs() / (2.0 * s)) - 1.0)
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫|p(x, z) − p(x′, z)| dz` by brute-force quadrature of the two densities.
pub fn kernel_tv_quadrature(k: &ArKernel, x: f64, xp: f64) -> f64 {
    let (lo1, hi1) = k.support(&[x]);
    let (lo2, hi2) = k.support(&[xp]);
    let (lo, hi) = (lo1[0].min(lo2[0]), hi1[0].max(hi2[0]));
    simpson(|z| (k.density(&[x], &[z]) - k.density(&[xp], &[z])).abs(), lo, hi, 200_000)
}

/// BL distance between 1-d discrete measures whose atoms lie on the lattice
/// `step·ℤ`, by exhaustive search over test-function values on the lattice
/// `{−1, −1 + step, …, 1}`.
///
/// The constraints `|f_i| ≤ 1` and `f_i − f_j ≤ |x_i − x_j|` form a network
/// matrix, so with lattice data some optimal vertex lies on the lattice and
/// the search is exact.
pub fn bl_lattice_bruteforce(a: &DiscreteMeasure, b: &DiscreteMeasure, step: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = a.iter().map(|(x, w)| (x[0], w)).collect();
    pts.extend(b.iter().map(|(x, w)| (x[0], -w)));
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (x, w) in pts {
        match merged.last_mut() {
            Some(last) if (last.0 - x).abs() < 1e-12 => last.1 += w,
            _ => merged.push((x, w)),
        }
    }
    let levels: Vec<f64> = {
        let k = (1.0 / step).round() as i64;
        (-k..=k).map(|i| i as f64 * step).collect()
    };
    fn dfs(i: usize, prev: Option<f64>, pts: &[(f64, f64)], levels: &[f64], acc: f64, best: &mut f64) {
        if i == pts.len() {
            *best = best.max(acc);
            return;
        }
        for &f in levels {
            if let Some(p) = prev {
                if (f - p).abs() > (pts[i].0 - pts[i - 1].0) + 1e-12 {
                    continue;
                }
            }
            dfs(i + 1, Some(f), pts, levels, acc + f * pts[i].1, best);
        }
    }
    let mut best = f64::NEG_INFINITY;
    dfs(0, None, &merged, &levels, 0.0, &mut best);
    best
}

/// Random 1-d discrete measure with `1..=max_atoms` atoms on `step·ℤ ∩ [−r, r]`.
pub fn random_lattice_measure(rng: &mut impl Rng, max_atoms: usize, step: f64, r: f64) -> DiscreteMeasure {
    let n = rng.random_range(1..=max_atoms);
    let k = (r / step) as i64;
    let atoms: Vec<f64> = (0..n).map(|_| rng.random_range(-k..=k) as f64 * step).collect();
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    DiscreteMeasure::from_unnormalized(1, atoms, weights).unwrap()
}

/// Random measure with arbitrary real atoms.
pub fn random_measure(rng: &mut impl Rng, max_atoms: usize, r: f64) -> DiscreteMeasure {
    let n = rng.random_range(1..=max_atoms);
    let atoms: Vec<f64> = (0..n).map(|_| rng.random_range(-r..r)).collect();
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    DiscreteMeasure::from_unnormalized(1, atoms, weights).unwrap()
}

/// A coupling of `a` and `b` (row-major): independent, or the north-west
/// corner rule applied after random permutations of both atom lists.
pub fn random_coupling(rng: &mut impl Rng, a: &DiscreteMeasure, b: &DiscreteMeasure) -> Vec<f64> {
    let (n, m) = (a.len(), b.len());
    if rng.random_bool(0.5) {
        return a.weights().iter().flat_map(|p| b.weights().iter().map(move |q| p * q)).collect();
    }
    let mut ia: Vec<usize> = (0..n).collect();
    let mut ib: Vec<usize> = (0..m).collect();
    for v in [&mut ia, &mut ib] {
        for i in (1..v.len()).rev() {
            let j = rng.random_range(0..=i);
            v.swap(i, j);
        }
    }
    let mut c = vec![0.0; n * m];
    let (mut ra, mut rb) = (a.weights().to_vec(), b.weights().to_vec());
    let (mut p, mut q) = (0, 0);
    while p < n && q < m {
        let (i, j) = (ia[p], ib[q]);
        let t = ra[i].min(rb[j]);
        c[i * m + j] += t;
        ra[i] -= t;
        rb[j] -= t;
        if ra[i] <= rb[j] {
            p += 1;
        } else {
            q += 1;
        }
    }
    c
}

pub fn y_grid() -> GridSpec {
    GridSpec::new(-20.0, 0.01, 4001).unwrap()
}
