//! Without informative observations the filter never forgets.
//!
//! `h ≡ 0`: the observations are pure noise, so the filters stay equal to
//! their priors and their TV distance is constant.

use filterlab::measures::tv_distance;
use filterlab::models::Preset;
use filterlab::stability::{twin_run, Method, TwinRunConfig};

fn main() -> filterlab::Result<()> {
    let preset = Preset::CounterexampleBlind;
    let (mu, nu) = preset.priors();
    let cfg = TwinRunConfig::new(preset.spec()?, mu.clone(), nu.clone(), 100, 1, Method::Grid(preset.default_grid()));
    let tv = twin_run(&cfg)?.tv();
    let exact = tv_distance(&mu, &nu)?;
    let spread = tv.iter().fold(0.0f64, |m, v| m.max((v - tv[0]).abs()));
    println!("tv(μ, ν) = {exact:.6}; grid tv_0 = {:.6}; max |tv_n − tv_0| = {spread:.1e}", tv[0]);
    Ok(())
}
