use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use super::Noise;
use crate::error::{Error, Result};

type Map = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Additive observation channel `Y = h(X) + ξ`, carrying a left inverse
/// `h⁻¹` with `h⁻¹(h(x)) = x`.
///
/// The inverse is not verified here, so channels without one (the blind
/// channel `h ≡ 0`) can still be built and then diagnosed by
/// [`assumption_report`](super::assumption_report).
#[derive(Clone)]
pub struct ObservationChannel {
    name: String,
    state_dim: usize,
    h: Arc<Map>,
    h_inverse: Arc<Map>,
    noise: Noise,
    gain: Option<f64>,
}

impl fmt::Debug for ObservationChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObservationChannel")
            .field("name", &self.name)
            .field("state_dim", &self.state_dim)
            .field("noise", &self.noise)
            .field("gain", &self.gain)
            .finish()
    }
}

impl ObservationChannel {
    pub fn new<H, G>(name: impl Into<String>, state_dim: usize, h: H, h_inverse: G, noise: Noise) -> Self
    where
        H: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            state_dim,
            h: Arc::new(h),
            h_inverse: Arc::new(h_inverse),
            noise,
            gain: None,
        }
    }

    /// `h(x) = x`.
    pub fn identity(noise: Noise) -> Self {
        let dim = noise.dim();
        let mut ch = Self::new("identity", dim, |x| x.to_vec(), |y| y.to_vec(), noise);
        ch.gain = Some(1.0);
        ch
    }

    /// `h(x) = g·x` in one dimension.
    pub fn linear(gain: f64, noise: Noise) -> Result<Self> {
        if gain == 0.0 || !gain.is_finite() {
            return Err(Error::InvalidParameter(format!("linear gain {gain}")));
        }
        if noise.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: noise.dim(),
            });
        }
        let mut ch = Self::new(
            format!("linear({gain})"),
            1,
            move |x| vec![gain * x[0]],
            move |y| vec![y[0] / gain],
            noise,
        );
        ch.gain = Some(gain);
        Ok(ch)
    }

    /// `h ≡ 0`: observations carry no information about the state. The
    /// recorded "inverse" is the identity map, which fails the round trip.
    pub fn blind(state_dim: usize, noise: Noise) -> Self {
        let obs_dim = noise.dim();
        Self::new("blind", state_dim, move |_| vec![0.0; obs_dim], |y| y.to_vec(), noise)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn obs_dim(&self) -> usize {
        self.noise.dim()
    }

    pub fn noise(&self) -> &Noise {
        &self.noise
    }

    /// Scalar gain `g` when `h(x) = g·x`.
    pub fn gain(&self) -> Option<f64> {
        self.gain
    }

    pub fn h(&self, x: &[f64]) -> Vec<f64> {
        (self.h)(x)
    }

    pub fn h_inverse(&self, y: &[f64]) -> Vec<f64> {
        (self.h_inverse)(y)
    }

    /// `q_ξ(y − h(x))`.
    pub fn likelihood(&self, y: &[f64], x: &[f64]) -> f64 {
        if let (Some(g), 1) = (self.gain, y.len()) {
            return self.noise.density().eval1(y[0] - g * x[0]);
        }
        let hx = (self.h)(x);
        let r: Vec<f64> = y.iter().zip(&hx).map(|(a, b)| a - b).collect();
        self.noise.density().eval(&r)
    }

    pub fn observe(&self, x: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        let xi = self.noise.sample(rng);
        (self.h)(x).iter().zip(&xi).map(|(a, b)| a + b).collect()
    }
}
