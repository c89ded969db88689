//! Diagnostics for the model assumptions: invertible observation function,
//! observation noise with a nowhere-vanishing characteristic function, and
//! TV-continuity of the transition kernel.
//!
//! The Fourier check scans a finite frequency window, so it is a heuristic
//! and reports its window in the evidence.

use filterlab::models::{assumption_report, char_fn_min, Noise, ObservationChannel, Preset};
use filterlab::measures::DensityFn;

fn main() -> filterlab::Result<()> {
    for preset in Preset::ALL {
        println!("== {preset}");
        for r in assumption_report(&preset.spec()?) {
            println!("{}", r.line());
        }
    }

    println!("== noise densities, |t| ≤ 10");
    for q in [DensityFn::gaussian(1.0)?, DensityFn::uniform(1.0)?, DensityFn::triangular(1.0)?] {
        let r = char_fn_min(&q, 10.0, 2001)?;
        println!("{:24} {}  first zero {:?}", q.name(), if r.pass { "PASS" } else { "FAIL" }, r.evidence.get("first_zero"));
    }

    // A linear channel with uniform noise breaks the Fourier condition.
    let ch = ObservationChannel::linear(2.0, Noise::uniform(0.5)?)?;
    let spec = Preset::ArContracting.spec()?;
    let spec = filterlab::models::HmmSpec::new(spec.kernel().clone(), ch, spec.prior().clone())?;
    let failing: Vec<_> = assumption_report(&spec).into_iter().filter(|r| !r.pass).map(|r| r.name).collect();
    println!("ar-contracting with uniform noise fails: {failing:?}");
    Ok(())
}
