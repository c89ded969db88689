use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::measures::DensityFn;

type Sampler = dyn Fn(&mut dyn RngCore) -> Vec<f64> + Send + Sync;

/// An additive noise law: its density (for likelihoods and checks) and a
/// sampler (for simulation).
#[derive(Clone)]
pub struct Noise {
    density: DensityFn,
    sampler: Arc<Sampler>,
    gaussian_std: Option<f64>,
}

impl fmt::Debug for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Noise")
            .field("density", &self.density)
            .field("gaussian_std", &self.gaussian_std)
            .finish()
    }
}

impl Noise {
    pub fn gaussian(std: f64) -> Result<Self> {
        Self::gaussian_iso(1, std)
    }

    pub fn gaussian_iso(dim: usize, std: f64) -> Result<Self> {
        let density = DensityFn::gaussian_iso(dim, std)?;
        Ok(Self {
            density,
            sampler: Arc::new(move |rng| {
                (0..dim)
                    .map(|_| std * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            }),
            gaussian_std: Some(std),
        })
    }

    pub fn uniform(half_width: f64) -> Result<Self> {
        let density = DensityFn::uniform(half_width)?;
        Ok(Self {
            density,
            sampler: Arc::new(move |rng| vec![half_width * (2.0 * rng.random::<f64>() - 1.0)]),
            gaussian_std: None,
        })
    }

    pub fn triangular(half_width: f64) -> Result<Self> {
        let density = DensityFn::triangular(half_width)?;
        Ok(Self {
            density,
            sampler: Arc::new(move |rng| {
                let (u, v): (f64, f64) = (rng.random(), rng.random());
                vec![half_width * (u + v - 1.0)]
            }),
            gaussian_std: None,
        })
    }

    /// Arbitrary law given by a density and a matching sampler.
    pub fn custom<S>(density: DensityFn, sampler: S) -> Self
    where
        S: Fn(&mut dyn RngCore) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            density,
            sampler: Arc::new(sampler),
            gaussian_std: None,
        }
    }

    pub fn density(&self) -> &DensityFn {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    /// Standard deviation when the law is an isotropic centered normal.
    pub fn gaussian_std(&self) -> Option<f64> {
        self.gaussian_std
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (self.sampler)(rng)
    }
}
