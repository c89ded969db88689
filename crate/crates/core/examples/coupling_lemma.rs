//! Both sides of the coupling inequality for Bayes updates of two discrete
//! predictors, under the independent coupling and a greedy quantile coupling.

use filterlab::measures::{DiscreteMeasure, GridSpec};
use filterlab::models::{Noise, ObservationChannel};

fn independent(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Vec<f64> {
    a.weights().iter().flat_map(|p| b.weights().iter().map(move |q| p * q)).collect()
}

/// North-west corner rule on the sorted atoms (the monotone coupling in 1-d).
fn quantile(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Vec<f64> {
    let (n, m) = (a.len(), b.len());
    let mut c = vec![0.0; n * m];
    let (mut ra, mut rb) = (a.weights().to_vec(), b.weights().to_vec());
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        let t = ra[i].min(rb[j]);
        c[i * m + j] += t;
        ra[i] -= t;
        rb[j] -= t;
        if ra[i] <= 1e-15 { i += 1 } else { j += 1 }
    }
    c
}

fn main() -> filterlab::Result<()> {
    let channel = ObservationChannel::identity(Noise::gaussian(1.0)?);
    let y = GridSpec::new(-12.0, 0.01, 2501)?;
    let rho = DiscreteMeasure::on_line(&[-1.0, 0.0, 0.5], &[0.3, 0.3, 0.4])?;
    let rho_p = DiscreteMeasure::on_line(&[-0.5, 1.0], &[0.5, 0.5])?;

    for (name, c) in [("independent", independent(&rho, &rho_p)), ("quantile", quantile(&rho, &rho_p))] {
        let r = filterlab::stability::check_coupling_bound(&rho, &rho_p, &c, &channel, &y)?;
        println!(
            "{name:12} lhs = {:.4}  rhs = {:.4} (distance {:.4} + density {:.4})  {}",
            r.lhs,
            r.rhs,
            r.rhs_distance,
            r.rhs_density,
            if r.pass { "holds" } else { "VIOLATED" }
        );
    }
    Ok(())
}
