//! Twin bootstrap particle filters on common random numbers.
//!
//! Both filters consume the same random stream, so with equal priors the
//! distance is exactly zero. With different priors the resampling steps
//! eventually pick different ancestors, so the distances level off at a
//! Monte Carlo floor set by the particle count (and, for TV, the bin width).

use filterlab::filters::run_particle_filter;
use filterlab::models::{simulate_path, Preset};
use filterlab::stability::{twin_run, Method, TwinRunConfig};

fn main() -> filterlab::Result<()> {
    let preset = Preset::ArContracting;
    let spec = preset.spec()?;
    let path = simulate_path(&spec, 30, 5)?;
    let steps = run_particle_filter(&spec, &path.observations, spec.prior(), 1000, 9)?;
    for (n, s) in steps.iter().enumerate().step_by(5) {
        let (m, v) = s.filter.moments();
        println!("n = {n:2}  x = {:+.3}  filter mean {m:+.3}  sd {:.3}", path.states[n][0], v.sqrt());
    }

    let (mu, nu) = preset.priors();
    let method = Method::Particle { particles: 2000, tv_grid: preset.default_grid() };
    let same = twin_run(&TwinRunConfig::new(spec.clone(), mu.clone(), mu.clone(), 20, 3, method.clone()))?;
    let diff = twin_run(&TwinRunConfig::new(spec, mu, nu, 20, 3, method))?;
    println!("equal priors, max bl = {:e}", same.bl().iter().cloned().fold(0.0, f64::max));
    for n in [0, 5, 10, 19] {
        println!("different priors, n = {n:2}: bl = {:.4}, tv = {:.4}", diff.bl()[n], diff.tv()[n]);
    }
    Ok(())
}
