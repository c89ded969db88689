//! Lattice operations: discretization, resampling and convolution with a
//! density.

use serde::{Deserialize, Serialize};

use super::{DensityFn, GridDensity, Measure};
use crate::error::{Error, Result};
use crate::numeric::normal_cdf;

/// Discretization must keep at least this fraction of the mass.
pub const MIN_CAPTURED_MASS: f64 = 1.0 - 1e-4;

/// Largest acceptable mass lost to truncating a convolution kernel.
pub const MAX_TRUNCATION_LOSS: f64 = 1e-6;

/// The lattice `origin + i·spacing`, `i < count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: f64,
    pub spacing: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(origin: f64, spacing: f64, count: usize) -> Result<Self> {
        let spec = Self {
            origin,
            spacing,
            count,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Lattice with the given spacing covering `[lo, hi]`.
    pub fn covering(lo: f64, hi: f64, spacing: f64) -> Result<Self> {
        let count = ((hi - lo) / spacing).round() as usize + 1;
        Self::new(lo, spacing, count)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) || !self.spacing.is_finite() || !self.origin.is_finite() || self.count == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid origin {} spacing {} count {}",
                self.origin, self.spacing, self.count
            )));
        }
        Ok(())
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn last(&self) -> f64 {
        self.node(self.count - 1)
    }

    /// Index of the nearest node, if `x` lies within half a cell of the lattice.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let k = ((x - self.origin) / self.spacing).round();
        if k >= 0.0 && (k as usize) < self.count {
            Some(k as usize)
        } else {
            None
        }
    }
}

/// Projects a 1-d measure onto the lattice.
///
/// Gaussians are evaluated at the nodes and renormalized; atoms go to their
/// nearest node; grids are resampled. Fails when the lattice (cells of half
/// a spacing around each node) holds less than `1 − 1e-4` of the mass.
pub fn discretize(m: &Measure, origin: f64, spacing: f64, count: usize) -> Result<GridDensity> {
    let spec = GridSpec::new(origin, spacing, count)?;
    if m.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: m.dim(),
        });
    }
    let lo = spec.origin - 0.5 * spacing;
    let hi = spec.last() + 0.5 * spacing;
    match m {
        Measure::Gaussian(g) => {
            let mean = g.mean()[0];
            let var = g.variance()[0];
            if var == 0.0 {
                return point_on_grid(&spec, mean);
            }
            let s = var.sqrt();
            let captured = normal_cdf((hi - mean) / s) - normal_cdf((lo - mean) / s);
            check_captured(captured)?;
            let values: Vec<f64> = (0..count).map(|i| g.pdf1(spec.node(i))).collect();
            if values.iter().sum::<f64>() > 0.0 {
                GridDensity::new(origin, spacing, values)
            } else {
                // Narrower than the lattice resolves.
                point_on_grid(&spec, mean)
            }
        }
        Measure::Discrete(d) => {
            let mut values = vec![0.0; count];
            let mut captured = 0.0;
            for (x, w) in d.iter() {
                if let Some(i) = spec.nearest(x[0]) {
                    values[i] += w / spacing;
                    captured += w;
                }
            }
            check_captured(captured)?;
            GridDensity::new(origin, spacing, values)
        }
        Measure::Grid(g) => resample(g, origin, spacing, count),
    }
}

fn point_on_grid(spec: &GridSpec, x: f64) -> Result<GridDensity> {
    let Some(i) = spec.nearest(x) else {
        return Err(Error::InsufficientMass {
            captured: 0.0,
            required: MIN_CAPTURED_MASS,
        });
    };
    let mut values = vec![0.0; spec.count];
    values[i] = 1.0;
    GridDensity::new(spec.origin, spec.spacing, values)
}

fn check_captured(captured: f64) -> Result<()> {
    if captured < MIN_CAPTURED_MASS {
        return Err(Error::InsufficientMass {
            captured,
            required: MIN_CAPTURED_MASS,
        });
    }
    Ok(())
}

/// Linear interpolation of the density onto another lattice, renormalized.
pub fn resample(g: &GridDensity, origin: f64, spacing: f64, count: usize) -> Result<GridDensity> {
    let spec = GridSpec::new(origin, spacing, count)?;
    if g.spec() == spec {
        return Ok(g.clone());
    }
    let values: Vec<f64> = (0..count).map(|i| interpolate(g, spec.node(i))).collect();
    let captured = spacing * values.iter().sum::<f64>();
    check_captured(captured)?;
    GridDensity::new(origin, spacing, values)
}

fn interpolate(g: &GridDensity, x: f64) -> f64 {
    let t = (x - g.origin()) / g.spacing();
    if t < 0.0 || t > (g.len() - 1) as f64 {
        return 0.0;
    }
    let i = t.floor() as usize;
    if i + 1 >= g.len() {
        return g.values()[g.len() - 1];
    }
    let frac = t - i as f64;
    g.values()[i] * (1.0 - frac) + g.values()[i + 1] * frac
}

/// Convolution `g ∗ q`, truncating `q` at its declared support radius.
pub fn convolve_density(g: &GridDensity, q: &DensityFn) -> Result<GridDensity> {
    convolve_density_truncated(g, q, q.radius())
}

/// Convolution `g ∗ q` with `q` truncated at `radius`; the output lattice
/// extends `g`'s by `⌈radius/spacing⌉` nodes on each side. Direct summation.
pub fn convolve_density_truncated(g: &GridDensity, q: &DensityFn, radius: f64) -> Result<GridDensity> {
    if q.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: q.dim(),
        });
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("truncation radius {radius}")));
    }
    let lost = 1.0 - q.mass_within(radius);
    if lost > MAX_TRUNCATION_LOSS {
        return Err(Error::TruncationLoss { radius, lost });
    }
    let h = g.spacing();
    let half = (radius / h).ceil() as usize;
    let kernel: Vec<f64> = (0..=2 * half)
        .map(|t| q.eval1((t as f64 - half as f64) * h))
        .collect();
    let n = g.len();
    let mut out = vec![0.0; n + 2 * half];
    for (i, &v) in g.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        // Output node i + t sits at offset (t − half)·h from input node i.
        for (t, &k) in kernel.iter().enumerate() {
            out[i + t] += v * k;
        }
    }
    GridDensity::new(g.origin() - half as f64 * h, h, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DiscreteMeasure, GaussianMeasure};

    #[test]
    fn gaussian_moments_preserved() {
        let g = discretize(&Measure::gaussian(0.0, 1.0).unwrap(), -8.0, 0.01, 1601).unwrap();
        assert!(g.mean().abs() < 1e-4);
        assert!((g.variance() - 1.0).abs() < 1e-4);
        assert!((g.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dirac_on_node() {
        let g = discretize(&DiscreteMeasure::dirac1(0.0).into(), -1.0, 0.5, 5).unwrap();
        assert_eq!(g.values(), &[0.0, 0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn symmetric_two_atoms() {
        let m = DiscreteMeasure::on_line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let g = discretize(&m.into(), -2.0, 0.25, 17).unwrap();
        assert_eq!(g.values()[4], 0.5 / 0.25);
        assert_eq!(g.values()[12], 0.5 / 0.25);
        assert_eq!(g.values().iter().filter(|v| **v > 0.0).count(), 2);
    }

    #[test]
    fn too_coarse_grid_errors() {
        let r = discretize(&Measure::gaussian(0.0, 1.0).unwrap(), -1.0, 0.1, 21);
        assert!(matches!(r, Err(Error::InsufficientMass { .. })));
    }

    #[test]
    fn point_convolution_reproduces_kernel() {
        let delta = discretize(&DiscreteMeasure::dirac1(0.0).into(), -1.0, 0.01, 201).unwrap();
        let q = DensityFn::gaussian(1.0).unwrap();
        let out = convolve_density(&delta, &q).unwrap();
        let sup = out
            .nodes()
            .zip(out.values())
            .map(|(x, v)| (v - q.eval1(x)).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-6, "sup error {sup}");
    }

    #[test]
    fn gaussian_convolution_doubles_variance() {
        let g = discretize(&GaussianMeasure::scalar(0.0, 1.0).unwrap().into(), -8.0, 0.01, 1601).unwrap();
        let out = convolve_density(&g, &DensityFn::gaussian(1.0).unwrap()).unwrap();
        assert!(out.mean().abs() < 1e-4);
        assert!((out.variance() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn truncation_loss_detected() {
        let g = discretize(&DiscreteMeasure::dirac1(0.0).into(), -1.0, 0.01, 201).unwrap();
        let q = DensityFn::gaussian(1.0).unwrap();
        assert!(matches!(
            convolve_density_truncated(&g, &q, 2.0),
            Err(Error::TruncationLoss { .. })
        ));
    }
}
