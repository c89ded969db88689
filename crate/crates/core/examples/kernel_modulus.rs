//! TV-continuity of autoregressive kernels.
//!
//! For `X' = b(X) + σ(X)η` the TV distance between `P(x, ·)` and `P(x', ·)`
//! reduces, by a change of variables, to a single integral over the noise
//! density. The empirical modulus `ϖ̂(δ)` takes the worst pair found at
//! distance `δ`.

use filterlab::models::{ar_kernel_tv, kernel_tv_modulus, ArKernel, Noise};

fn main() -> filterlab::Result<()> {
    let k = ArKernel::affine(0.5, 0.0, 1.0, Noise::gaussian(1.0)?)?;
    println!("tv(P(0,·), P(1,·)) = {:.6}", ar_kernel_tv(&k, &[0.0], &[1.0])?);

    let nonlinear = ArKernel::scalar("sin drift", |x: f64| x.sin(), |x: f64| 1.0 + 0.5 * x.cos().abs(), Noise::gaussian(1.0)?, 1.0)?;
    let deltas: Vec<f64> = (0..=10).rev().map(|i| 0.5f64.powi(i)).collect();
    for (name, kernel) in [("affine", &k), ("sin drift", &nonlinear)] {
        let curve = kernel_tv_modulus(kernel, &deltas, 16, 0)?;
        println!("{name}:");
        for (d, v) in curve.deltas.iter().zip(&curve.values) {
            println!("  δ = {d:.5}  ϖ̂ = {v:.5}");
        }
    }
    Ok(())
}
