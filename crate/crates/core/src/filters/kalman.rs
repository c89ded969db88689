use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::StaticGaussianModel;

/// Filter `N(z, v)` of the static-Gaussian model after observations
/// `Y_0 … Y_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KalmanStaticState {
    pub z: f64,
    pub v: f64,
    pub k: usize,
}

/// Closed-form filters for `X_k = X_0 ~ N(prior_mean, σ²)`, `Y_k = X_0 + ξ_k`:
///
/// ```text
/// Z_k = (prior_mean + σ² Σ_{ℓ≤k} Y_ℓ) / (1 + σ²(k+1)),   V_k = σ² / (1 + σ²(k+1))
/// ```
///
/// ```
/// use filterlab::filters::kalman_static;
/// use filterlab::models::StaticGaussianModel;
///
/// let m = StaticGaussianModel::new(0.0, 1.0, 1.0).unwrap();
/// let s = kalman_static(&m, 0.0, &[2.0]).unwrap();
/// assert_eq!((s[0].z, s[0].v), (1.0, 0.5));
/// ```
pub fn kalman_static(model: &StaticGaussianModel, prior_mean: f64, observations: &[f64]) -> Result<Vec<KalmanStaticState>> {
    if observations.is_empty() {
        return Err(Error::InvalidParameter("kalman_static needs at least one observation".into()));
    }
    if !prior_mean.is_finite() {
        return Err(Error::NonFinite(format!("prior mean {prior_mean}")));
    }
    let s2 = model.sigma2;
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(observations.len());
    for (k, &y) in observations.iter().enumerate() {
        if !y.is_finite() {
            return Err(Error::NonFinite(format!("observation {k}: {y}")));
        }
        sum += y;
        let denom = 1.0 + s2 * (k + 1) as f64;
        out.push(KalmanStaticState {
            z: (prior_mean + s2 * sum) / denom,
            v: s2 / denom,
            k,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_sequence() {
        let m = StaticGaussianModel::default();
        let s = kalman_static(&m, 0.0, &[0.0; 10]).unwrap();
        assert!((s[4].v - 1.0 / 6.0).abs() < 1e-15);
        assert!((s[9].v - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_prior() {
        let m = StaticGaussianModel::new(0.7, 1.0, 0.0).unwrap();
        for s in kalman_static(&m, 0.7, &[3.0, -1.0, 2.0]).unwrap() {
            assert_eq!((s.z, s.v), (0.7, 0.0));
        }
    }

    #[test]
    fn matches_sequential_conjugate_updates() {
        let m = StaticGaussianModel::new(0.3, 1.0, 2.5).unwrap();
        let ys = [0.4, -1.2, 2.2, 0.9];
        let states = kalman_static(&m, 0.3, &ys).unwrap();
        let (mut mean, mut var) = (0.3, 2.5);
        for (y, s) in ys.iter().zip(&states) {
            let post = var / (1.0 + var);
            mean = post * (mean / var + y);
            var = post;
            assert!((s.z - mean).abs() < 1e-12 && (s.v - var).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_empty_and_nonfinite() {
        let m = StaticGaussianModel::default();
        assert!(kalman_static(&m, 0.0, &[]).is_err());
        assert!(kalman_static(&m, 0.0, &[f64::NAN]).is_err());
    }
}
