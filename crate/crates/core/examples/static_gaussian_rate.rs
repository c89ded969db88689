//! The static Gaussian example: `X_n = X_0`, `Y_n = X_0 + ξ_n`, priors
//! `N(α, σ²)` and `N(β, σ²)`.
//!
//! Both filters are Gaussian with the same variance, so the TV distance
//! between them decays only like `n^{-1/2}` and the BL distance like `n^{-1}`.
//! The cosine test function gives a lower bound whose `liminf n·(…)` is
//! `|β − α| σ⁻² |sin X₀|`.
//!
//! ```text
//! cargo run --release --example static_gaussian_rate -- [seed] [horizon]
//! ```

use filterlab::models::Preset;
use filterlab::stability::{estimate_rate, liminf_constant, tail_window, twin_run, Method, TwinRunConfig};

fn main() -> filterlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(42);
    let horizon: usize = args.next().map(|s| s.parse().expect("horizon")).unwrap_or(2000);

    let preset = Preset::StaticGaussian;
    let model = preset.static_model().expect("static preset");
    let (mu, nu) = preset.priors();
    let cfg = TwinRunConfig::new(preset.spec()?, mu, nu, horizon, seed, Method::KalmanStatic);
    let trace = twin_run(&cfg)?;

    for n in [1, 10, 100, 1000, horizon - 1] {
        let r = &trace.rows[n];
        println!(
            "n = {n:5}  bl = {:.3e}  tv = {:.3e}  n·cos_lower = {:.4}",
            r.bl.unwrap(),
            r.tv.unwrap(),
            n as f64 * r.cos_lower.unwrap()
        );
    }

    let fit = estimate_rate(&trace.bl(), tail_window(horizon))?;
    println!("BL rate: {} (log-log slope {:.3}, r² {:.4})", fit.classification.as_str(), fit.slope, fit.r2);
    let tv_fit = estimate_rate(&trace.tv(), tail_window(horizon))?;
    println!("TV rate: {} (log-log slope {:.3})", tv_fit.classification.as_str(), tv_fit.slope);

    let x0 = trace.initial_state[0];
    let l = liminf_constant(&trace, &model, x0, 0.5)?;
    println!(
        "X0 = {x0:.4}: min n·cos_lower over the second half = {:.4}, constant = {:.4} ({:.1}% off)",
        l.estimate,
        l.target,
        100.0 * l.relative_error()
    );
    Ok(())
}
