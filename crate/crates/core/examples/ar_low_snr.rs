//! Forgetting at low signal-to-noise ratio.
//!
//! A Gaussian random walk observed through noise five times larger than its
//! increments. The signal is not ergodic and the observations are weak, yet
//! the TV distance between filters started at `N(−2, 1)` and `N(2, 1)` still
//! collapses.

use filterlab::measures::tv_distance;
use filterlab::models::Preset;
use filterlab::stability::{twin_run, Distances, Method, TwinRunConfig};

fn main() -> filterlab::Result<()> {
    let preset = Preset::ArRandomWalk;
    let (mu, nu) = preset.priors();
    let tv0 = tv_distance(&mu, &nu)?;
    let horizon = 200;

    let mut finals = Vec::new();
    for seed in 0..5 {
        let mut cfg = TwinRunConfig::new(preset.spec()?, mu.clone(), nu.clone(), horizon, seed, Method::Grid(preset.default_grid()));
        cfg.distances = Distances { bl: false, tv: true };
        let trace = twin_run(&cfg)?;
        let tv = trace.tv();
        println!(
            "seed {seed}: tv_0 = {:.4}  tv_10 = {:.4}  tv_50 = {:.2e}  tv_{} = {:.2e}  ({:.2}s)",
            tv[0],
            tv[10],
            tv[50],
            horizon - 1,
            tv[horizon - 1],
            trace.wall_time
        );
        finals.push(tv[horizon - 1]);
    }
    let mean = finals.iter().sum::<f64>() / finals.len() as f64;
    println!("tv(μ, ν) = {tv0:.4}; mean final tv = {mean:.2e}");
    Ok(())
}
