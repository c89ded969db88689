use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::HmmSpec;
use crate::error::{Error, Result};
use crate::measures::Measure;

/// One realization of the signal/observation pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulatedPath {
    pub states: Vec<Vec<f64>>,
    pub observations: Vec<Vec<f64>>,
}

impl SimulatedPath {
    /// Scalar observations of a 1-d model.
    pub fn observations_1d(&self) -> Vec<f64> {
        self.observations.iter().map(|y| y[0]).collect()
    }

    pub fn states_1d(&self) -> Vec<f64> {
        self.states.iter().map(|x| x[0]).collect()
    }
}

/// Simulates `X_0 ~ prior`, `X_{k+1} ~ P(X_k, ·)`, `Y_k = h(X_k) + ξ_k` for
/// `k < horizon`. Deterministic in `seed`.
pub fn simulate_path(spec: &HmmSpec, horizon: usize, seed: u64) -> Result<SimulatedPath> {
    simulate_path_from(spec, spec.prior(), horizon, seed)
}

/// Same as [`simulate_path`] with `X_0` drawn from `prior` instead of the
/// spec's own prior.
pub fn simulate_path_from(spec: &HmmSpec, prior: &Measure, horizon: usize, seed: u64) -> Result<SimulatedPath> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if prior.dim() != spec.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.state_dim(),
            found: prior.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..prior.dim()).map(|_| rng.random()).collect();
    let mut x = prior.quantile_sample(&u);
    let mut states = Vec::with_capacity(horizon);
    let mut observations = Vec::with_capacity(horizon);
    for k in 0..horizon {
        if k > 0 {
            x = spec.kernel().sample(&x, &mut rng);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("signal state at step {k}: {x:?}")));
        }
        let y = spec.channel().observe(&x, &mut rng);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("observation at step {k}: {y:?}")));
        }
        states.push(x.clone());
        observations.push(y);
    }
    Ok(SimulatedPath {
        states,
        observations,
    })
}
