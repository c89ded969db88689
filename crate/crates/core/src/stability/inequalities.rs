use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::grid_predictors;
use crate::error::{Error, Result};
use crate::filters::update;
use crate::measures::{bl_signed_sup, inverse_cdf_index, tv_distance, DiscreteMeasure, GridSpec, Measure};
use crate::models::{simulate_path_from, HmmSpec, ObservationChannel};
use crate::numeric::euclidean;

/// Coupling marginals must reproduce the measures within this.
const MARGINAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CouplingCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `E(d(h⁻¹Z, h⁻¹Z′) ∧ 2)`.
    pub rhs_distance: f64,
    /// `2 ∫ E|q_ξ(y − Z) − q_ξ(y − Z′)| dy`.
    pub rhs_density: f64,
    pub pass: bool,
}

/// Evaluates both sides of the coupling inequality for `Z ~ ρ`, `Z′ ~ ρ′`
/// (observation-space atoms) joined by `coupling`:
///
/// ```text
/// ∫ sup_{f ∈ Lip} | ∫f(h⁻¹x) q(y−x) ρ(dx) − [∫f(h⁻¹x) q(y−x) ρ′(dx) / ∫q(y−x) ρ′(dx)] · ∫q(y−x) ρ(dx) | dy
///     ≤ E(d(h⁻¹Z, h⁻¹Z′) ∧ 2) + 2 ∫ E|q(y−Z) − q(y−Z′)| dy
/// ```
///
/// with `0/0 = 1`. For each node of `y_grid` the supremum is an exact LP over
/// test-function values on the atoms `h⁻¹(x)`. Both `dy` integrals are
/// Riemann sums on `y_grid`, which must cover the likelihood supports.
/// `coupling` is row-major: entry `(i, j)` pairs atom `i` of `rho` with atom
/// `j` of `rho_prime`, in their canonical (sorted) order.
pub fn check_coupling_bound(
    rho: &DiscreteMeasure,
    rho_prime: &DiscreteMeasure,
    coupling: &[f64],
    channel: &ObservationChannel,
    y_grid: &GridSpec,
) -> Result<CouplingCheck> {
    if channel.obs_dim() != 1 || rho.dim() != 1 || rho_prime.dim() != 1 {
        return Err(Error::Unsupported("coupling check with multivariate observations".into()));
    }
    let (n, m) = (rho.len(), rho_prime.len());
    if coupling.len() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            found: coupling.len(),
        });
    }
    if coupling.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
        return Err(Error::InvalidWeights("coupling entries must be finite and nonnegative".into()));
    }
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        let row: f64 = coupling[i * m..(i + 1) * m].iter().sum();
        deviation = deviation.max((row - rho.weights()[i]).abs());
    }
    for j in 0..m {
        let col: f64 = (0..n).map(|i| coupling[i * m + j]).sum();
        deviation = deviation.max((col - rho_prime.weights()[j]).abs());
    }
    if deviation > MARGINAL_TOL {
        return Err(Error::MarginalMismatch { deviation });
    }

    let x: Vec<f64> = rho.atoms().to_vec();
    let xp: Vec<f64> = rho_prime.atoms().to_vec();
    let hx: Vec<Vec<f64>> = x.iter().map(|v| channel.h_inverse(&[*v])).collect();
    let hxp: Vec<Vec<f64>> = xp.iter().map(|v| channel.h_inverse(&[*v])).collect();
    let state_dim = hx[0].len();
    let points: Vec<f64> = hx.iter().chain(&hxp).flatten().copied().collect();

    let mut rhs_distance = 0.0;
    for i in 0..n {
        for j in 0..m {
            rhs_distance += coupling[i * m + j] * euclidean(&hx[i], &hxp[j]).min(2.0);
        }
    }

    let q = channel.noise().density();
    let dy = y_grid.spacing;
    let mut lhs = 0.0;
    let mut density_gap = 0.0;
    let mut weights = vec![0.0; n + m];
    for k in 0..y_grid.count {
        let y = y_grid.node(k);
        let qx: Vec<f64> = x.iter().map(|v| q.eval1(y - v)).collect();
        let qxp: Vec<f64> = xp.iter().map(|v| q.eval1(y - v)).collect();
        let a: f64 = qx.iter().zip(rho.weights()).map(|(q, r)| q * r).sum();
        let b: f64 = qxp.iter().zip(rho_prime.weights()).map(|(q, r)| q * r).sum();
        let sup = if b == 0.0 {
            // The ratio is 1 by convention; f ≡ −1 attains the supremum.
            2.0 * a
        } else {
            for i in 0..n {
                weights[i] = qx[i] * rho.weights()[i];
            }
            for j in 0..m {
                weights[n + j] = -a / b * qxp[j] * rho_prime.weights()[j];
            }
            bl_signed_sup(state_dim, &points, &weights)?.max(0.0)
        };
        lhs += sup * dy;
        for i in 0..n {
            for j in 0..m {
                density_gap += coupling[i * m + j] * (qx[i] - qxp[j]).abs();
            }
        }
    }
    let rhs_density = 2.0 * density_gap * dy;
    let rhs = rhs_distance + rhs_density;
    Ok(CouplingCheck {
        lhs,
        rhs,
        rhs_distance,
        rhs_density,
        pass: lhs <= rhs + 1e-6,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PredictorTvCheck {
    /// Monte Carlo mean of `‖π_n^μ − π_n^ν‖_TV` over fresh `Y_n`.
    pub lhs: f64,
    /// `2‖π_{n−}^μ − π_{n−}^ν‖_TV`.
    pub rhs: f64,
    pub standard_error: f64,
    pub pass: bool,
    /// Draws that entered the average.
    pub draws: usize,
    /// Draws dropped because an update was degenerate.
    pub degenerate: usize,
}

/// Checks `E^μ(‖π_n^μ − π_n^ν‖_TV | Y_0 … Y_{n−1}) ≤ 2‖π_{n−}^μ − π_{n−}^ν‖_TV`
/// on grid filters.
///
/// `Y_0 … Y_{n−1}` come from one path simulated under `μ` (seeded by
/// `seed`) and are then held fixed. Each draw samples `X_n` from the
/// predictor `π_{n−}^μ` (a node, jittered uniformly within its cell), then
/// `Y_n = h(X_n) + ξ`, and updates both predictors. Passes when the sample
/// mean is at most the right-hand side plus three standard errors.
pub fn filter_predictor_tv_check(
    spec: &HmmSpec,
    prior_mu: &Measure,
    prior_nu: &Measure,
    n: usize,
    draws: usize,
    seed: u64,
    grid: &GridSpec,
) -> Result<PredictorTvCheck> {
    if draws < 100 {
        return Err(Error::InvalidParameter(format!("{draws} observation draws (need at least 100)")));
    }
    let path = simulate_path_from(spec, prior_mu, n + 1, seed)?;
    let past = &path.observations[..n];
    let (pm, pn) = grid_predictors(spec, prior_mu, prior_nu, grid, past)?;
    let rhs = 2.0 * tv_distance(&pm.measure(), &pn.measure())?;

    // unwrap: grid_predictors returns grid states.
    let gm = pm.as_grid().unwrap();
    let h = gm.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut values = Vec::with_capacity(draws);
    let mut degenerate = 0;
    for _ in 0..draws {
        let i = inverse_cdf_index(gm.values().iter().map(|v| v * h), rng.random());
        let x = gm.node(i) + (rng.random::<f64>() - 0.5) * h;
        let y = spec.channel().observe(&[x], &mut rng);
        let (a, b) = match (update(&pm, &y, spec.channel()), update(&pn, &y, spec.channel())) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) if e.is_degenerate() => {
                degenerate += 1;
                continue;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        values.push(tv_distance(&a.measure(), &b.measure())?);
    }
    let k = values.len();
    if k < 2 {
        return Err(Error::TooFewPoints { usable: k });
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    let standard_error = (var / k as f64).sqrt();
    Ok(PredictorTvCheck {
        lhs: mean,
        rhs,
        standard_error,
        pass: mean <= rhs + 3.0 * standard_error,
        draws: k,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Noise, Preset};
    use crate::numeric::normal_cdf;

    fn y_grid() -> GridSpec {
        GridSpec::new(-12.0, 0.01, 2501).unwrap()
    }

    fn id() -> ObservationChannel {
        ObservationChannel::identity(Noise::gaussian(1.0).unwrap())
    }

    #[test]
    fn identical_measures() {
        let r = DiscreteMeasure::on_line(&[0.0, 1.5], &[0.3, 0.7]).unwrap();
        let c = check_coupling_bound(&r, &r, &[0.3, 0.0, 0.0, 0.7], &id(), &y_grid()).unwrap();
        assert!(c.lhs.abs() < 1e-12 && c.rhs.abs() < 1e-12 && c.pass, "{c:?}");
    }

    #[test]
    fn two_diracs() {
        let c = check_coupling_bound(&DiscreteMeasure::dirac1(0.0), &DiscreteMeasure::dirac1(1.0), &[1.0], &id(), &y_grid())
            .unwrap();
        let tv01 = 2.0 * (2.0 * normal_cdf(0.5) - 1.0);
        assert!((c.rhs_distance - 1.0).abs() < 1e-12);
        // |φ(y) − φ(y − 1)| has a kink at y = 1/2, so the Riemann sum is O(h²).
        assert!((c.rhs_density - 2.0 * tv01).abs() < 1e-4, "{c:?}");
        assert!((c.lhs - 1.0).abs() < 1e-6, "{c:?}");
        assert!(c.pass);
    }

    #[test]
    fn marginal_mismatch() {
        let r = DiscreteMeasure::on_line(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        let err = check_coupling_bound(&r, &r, &[0.5, 0.5, 0.0, 0.0], &id(), &y_grid()).unwrap_err();
        assert!(matches!(err, Error::MarginalMismatch { .. }));
    }

    #[test]
    fn equal_priors_predictor_check() {
        let spec = Preset::ArContracting.spec().unwrap();
        let mu = Measure::gaussian(0.0, 1.0).unwrap();
        let grid = GridSpec::new(-10.0, 0.05, 401).unwrap();
        let c = filter_predictor_tv_check(&spec, &mu, &mu, 2, 100, 3, &grid).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        assert!(c.pass);
    }
}
