//! The filtering recursion.
//!
//! Starting from a prior, each observation `Y_n` is absorbed by a Bayes
//! [`update`], turning the predictor `π_{n−}` into the filter `π_n`, and
//! [`predict`] pushes `π_n` through the signal kernel to get `π_{(n+1)−}`.
//! Time 0 starts with an update, so `π_0` is the law of `X_0` given `Y_0`.
//!
//! Three carriers are supported:
//!
//! - [`GridDensity`]: deterministic quadrature on a 1-d lattice,
//! - [`ParticleCloud`]: bootstrap Monte Carlo in any dimension,
//! - [`GaussianMeasure`]: closed forms for affine-Gaussian models.
//!
//! The drivers [`GridFilter`], [`ParticleFilter`] and [`kalman_static`] run
//! whole observation sequences.

mod grid;
mod kalman;
mod particle;

use std::io::Write;

use rand::RngCore;
use serde::Serialize;

pub use grid::{run_grid_filter, GridFilter, GridStep};
pub use kalman::{kalman_static, KalmanStaticState};
pub use particle::{run_particle_filter, ParticleFilter, ParticleStep};

use crate::error::{Error, Result};
use crate::measures::{convolve_density, discretize, DiscreteMeasure, GaussianMeasure, GridDensity, GridSpec, Measure};
use crate::models::{KernelForm, ObservationChannel, TransitionKernel};
use crate::numeric;

/// Total likelihood mass below which an update is declared degenerate.
pub const DEGENERATE_MASS: f64 = 1e-300;

/// Whether a state holds a filter `π_n` or a predictor `π_{n−}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Predictor,
    Filter,
}

/// Weighted particles. Unlike [`DiscreteMeasure`], duplicates are kept so
/// every particle can be propagated on its own.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleCloud {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl ParticleCloud {
    /// `points` is row-major, `dim` coordinates per particle. Weights are
    /// normalized.
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * weights.len(),
                found: points.len(),
            });
        }
        if weights.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights("particle weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidWeights("particle weights sum to zero".into()));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { dim, points, weights })
    }

    /// Equally weighted particles.
    pub fn uniform(dim: usize, points: Vec<f64>) -> Result<Self> {
        let n = points.len() / dim.max(1);
        Self::new(dim, points, vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Effective sample size `1 / Σ w²`.
    pub fn ess(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// The cloud as a measure (coinciding particles merged).
    pub fn to_measure(&self) -> DiscreteMeasure {
        // unwrap: the cloud is nonempty and normalized.
        DiscreteMeasure::from_unnormalized(self.dim, self.points.clone(), self.weights.clone()).unwrap()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    Grid(GridDensity),
    Particles(ParticleCloud),
    Gaussian(GaussianMeasure),
}

/// `π_n` or `π_{n−}` together with its time index.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterState {
    repr: Representation,
    time: usize,
    kind: FilterKind,
}

impl FilterState {
    /// A prior used as the time-0 predictor.
    pub fn prior(repr: Representation) -> Self {
        Self {
            repr,
            time: 0,
            kind: FilterKind::Predictor,
        }
    }

    /// The prior projected onto `grid`.
    pub fn prior_on_grid(prior: &Measure, grid: &GridSpec) -> Result<Self> {
        let g = discretize(prior, grid.origin, grid.spacing, grid.count)?;
        Ok(Self::prior(Representation::Grid(g)))
    }

    pub fn new(repr: Representation, time: usize, kind: FilterKind) -> Self {
        Self { repr, time, kind }
    }

    pub fn repr(&self) -> &Representation {
        &self.repr
    }

    pub fn into_repr(self) -> Representation {
        self.repr
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn as_grid(&self) -> Option<&GridDensity> {
        match &self.repr {
            Representation::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_particles(&self) -> Option<&ParticleCloud> {
        match &self.repr {
            Representation::Particles(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_gaussian(&self) -> Option<&GaussianMeasure> {
        match &self.repr {
            Representation::Gaussian(g) => Some(g),
            _ => None,
        }
    }

    /// The state as a [`Measure`] (particle clouds become discrete measures).
    pub fn measure(&self) -> Measure {
        match &self.repr {
            Representation::Grid(g) => g.clone().into(),
            Representation::Particles(p) => p.to_measure().into(),
            Representation::Gaussian(g) => g.clone().into(),
        }
    }

    /// Mean and variance of the first coordinate.
    pub fn moments(&self) -> (f64, f64) {
        match &self.repr {
            Representation::Grid(g) => (g.mean(), g.variance()),
            Representation::Particles(p) => numeric::weighted_moments(
                (0..p.len()).map(|i| (p.point(i)[0], p.weights()[i])),
            ),
            Representation::Gaussian(g) => (g.mean()[0], g.variance()[0]),
        }
    }

    /// Total mass of the carrier (1 up to rounding).
    pub fn mass(&self) -> f64 {
        match &self.repr {
            Representation::Grid(g) => g.mass(),
            Representation::Particles(p) => p.weights().iter().sum(),
            Representation::Gaussian(_) => 1.0,
        }
    }

    pub fn record(&self) -> FilterRecord {
        let (mean, variance) = self.moments();
        FilterRecord {
            step: self.time,
            kind: self.kind,
            mean,
            variance,
            mass_check: (self.mass() - 1.0).abs(),
        }
    }
}

/// Pushes a filter `π_n` through the kernel, giving the predictor
/// `π_{(n+1)−}`:
///
/// ```text
/// ∫ f(x′) π_{(n+1)−}(dx′) = ∫∫ f(x′) P(x, dx′) π_n(dx)
/// ```
///
/// Grids use the transition density (`v′_j = h·Σ_i p(x_i, x_j) v_i`, then
/// renormalized), particles move through the sampler with their weights
/// unchanged, Gaussians need an affine-Gaussian kernel. `rng` is only used by
/// particles.
pub fn predict(state: &FilterState, kernel: &TransitionKernel, rng: &mut dyn RngCore) -> Result<FilterState> {
    if state.kind != FilterKind::Filter {
        return Err(Error::InvalidParameter(format!(
            "predict needs a filter state, got a predictor at time {}",
            state.time
        )));
    }
    let repr = if kernel.is_identity() {
        state.repr.clone()
    } else {
        match &state.repr {
            Representation::Grid(g) => Representation::Grid(grid::predict_grid(g, kernel)?),
            Representation::Particles(p) => {
                let mut points = Vec::with_capacity(p.points.len());
                for i in 0..p.len() {
                    points.extend(kernel.sample(p.point(i), rng));
                }
                Representation::Particles(ParticleCloud {
                    dim: p.dim,
                    points,
                    weights: p.weights.clone(),
                })
            }
            Representation::Gaussian(g) => Representation::Gaussian(predict_gaussian(g, kernel)?),
        }
    };
    Ok(FilterState {
        repr,
        time: state.time + 1,
        kind: FilterKind::Predictor,
    })
}

fn predict_gaussian(g: &GaussianMeasure, kernel: &TransitionKernel) -> Result<GaussianMeasure> {
    let unsupported = || Error::Unsupported(format!("closed-form Gaussian predict under kernel `{}`", kernel.name()));
    let KernelForm::Ar(ar) = kernel.form() else {
        return Err(unsupported());
    };
    let (Some(aff), Some(eta)) = (ar.affine_params(), ar.noise().gaussian_std()) else {
        return Err(unsupported());
    };
    let (m, v) = (g.mean()[0], g.variance()[0]);
    GaussianMeasure::scalar(aff.a * m + aff.c, aff.a * aff.a * v + (aff.s * eta).powi(2))
}

/// Bayes update of a predictor `π_{n−}` by the observation `y`:
///
/// ```text
/// π_n(dx) ∝ q_ξ(y − h(x)) π_{n−}(dx)
/// ```
///
/// Fails with [`Error::DegenerateUpdate`] when `∫ q_ξ(y − h(x)) π_{n−}(dx)`
/// is below [`DEGENERATE_MASS`].
pub fn update(state: &FilterState, y: &[f64], channel: &ObservationChannel) -> Result<FilterState> {
    if state.kind != FilterKind::Predictor {
        return Err(Error::InvalidParameter(format!(
            "update needs a predictor state, got a filter at time {}",
            state.time
        )));
    }
    if y.len() != channel.obs_dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.obs_dim(),
            found: y.len(),
        });
    }
    let degenerate = |mass: f64| Error::DegenerateUpdate {
        observation: y.to_vec(),
        mass,
    };
    let repr = match &state.repr {
        Representation::Grid(g) => {
            let values: Vec<f64> = g
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| if *v == 0.0 { 0.0 } else { v * channel.likelihood(y, &[g.node(i)]) })
                .collect();
            let mass = g.spacing() * values.iter().sum::<f64>();
            if !(mass >= DEGENERATE_MASS) {
                return Err(degenerate(mass));
            }
            Representation::Grid(GridDensity::new(g.origin(), g.spacing(), values)?)
        }
        Representation::Particles(p) => {
            let weights: Vec<f64> = (0..p.len())
                .map(|i| p.weights[i] * channel.likelihood(y, p.point(i)))
                .collect();
            let mass: f64 = weights.iter().sum();
            if !(mass >= DEGENERATE_MASS) {
                return Err(degenerate(mass));
            }
            Representation::Particles(ParticleCloud {
                dim: p.dim,
                points: p.points.clone(),
                weights: weights.into_iter().map(|w| w / mass).collect(),
            })
        }
        Representation::Gaussian(g) => Representation::Gaussian(update_gaussian(g, y, channel)?),
    };
    Ok(FilterState {
        repr,
        time: state.time,
        kind: FilterKind::Filter,
    })
}

fn update_gaussian(g: &GaussianMeasure, y: &[f64], channel: &ObservationChannel) -> Result<GaussianMeasure> {
    let (Some(gain), Some(r), 1) = (channel.gain(), channel.noise().gaussian_std(), g.dim()) else {
        return Err(Error::Unsupported(format!(
            "closed-form Gaussian update through channel `{}`",
            channel.name()
        )));
    };
    let (m, v) = (g.mean()[0], g.variance()[0]);
    if v == 0.0 {
        return Ok(g.clone());
    }
    let r2 = r * r;
    let post_v = v * r2 / (r2 + gain * gain * v);
    let post_m = post_v * (m / v + gain * y[0] / r2);
    GaussianMeasure::scalar(post_m, post_v)
}

/// Law of the next observation given the past, `π_{n−} ∘ h⁻¹ ∗ q_ξ`.
///
/// The predictor is pushed through `h` onto a lattice (nearest node) and
/// convolved with the noise density. The lattice spacing is the grid's own
/// (scaled by `|g|` for linear channels), and for other carriers a fraction
/// of the noise scale.
pub fn observation_predictive(state: &FilterState, channel: &ObservationChannel) -> Result<GridDensity> {
    if state.kind != FilterKind::Predictor {
        return Err(Error::InvalidParameter("observation_predictive needs a predictor state".into()));
    }
    if channel.obs_dim() != 1 {
        return Err(Error::Unsupported("observation predictive for multivariate observations".into()));
    }
    let q = channel.noise().density();
    let noise_step = q.radius() / 1000.0;
    let image: DiscreteMeasure = match &state.repr {
        Representation::Grid(g) => {
            let (pts, ws): (Vec<f64>, Vec<f64>) = g.masses().map(|(x, w)| (channel.h(&[x])[0], w)).unzip();
            DiscreteMeasure::from_unnormalized(1, pts, ws)?
        }
        Representation::Particles(p) => {
            let pts: Vec<f64> = (0..p.len()).flat_map(|i| channel.h(p.point(i))).collect();
            DiscreteMeasure::from_unnormalized(1, pts, p.weights.clone())?
        }
        Representation::Gaussian(g) => {
            let (m, v) = (g.mean()[0], g.variance()[0]);
            let Some(gain) = channel.gain() else {
                return Err(Error::Unsupported("Gaussian predictive through a nonlinear channel".into()));
            };
            let s = gain.abs() * v.sqrt();
            if s == 0.0 {
                DiscreteMeasure::dirac1(gain * m)
            } else {
                let h = noise_step.min(s / 32.0);
                let grid = GridSpec::covering(gain * m - 12.0 * s, gain * m + 12.0 * s, h)?;
                let img = discretize(&Measure::gaussian(gain * m, s * s)?, grid.origin, h, grid.count)?;
                return convolve_density(&img, q);
            }
        }
    };
    let spacing = match (&state.repr, channel.gain()) {
        (Representation::Grid(g), Some(gain)) => g.spacing() * gain.abs(),
        (Representation::Grid(g), None) => g.spacing(),
        _ => noise_step,
    };
    let atoms = image.atoms();
    let (lo, hi) = (atoms[0], atoms[atoms.len() - 1]);
    let count = ((hi - lo) / spacing).round() as usize + 1;
    let lattice = discretize(&image.into(), lo, spacing, count)?;
    convolve_density(&lattice, q)
}

/// One serialized filter step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilterRecord {
    pub step: usize,
    pub kind: FilterKind,
    pub mean: f64,
    pub variance: f64,
    /// `|total mass − 1|`.
    pub mass_check: f64,
}

/// Writes records as CSV with header `step,kind,mean,variance,mass_check`.
pub fn write_filter_records<W: Write>(out: W, records: &[FilterRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "kind", "mean", "variance", "mass_check"])?;
    for r in records {
        let kind = match r.kind {
            FilterKind::Predictor => "predictor",
            FilterKind::Filter => "filter",
        };
        w.write_record([
            r.step.to_string(),
            kind.to_string(),
            numeric::fmt_sig12(r.mean),
            numeric::fmt_sig12(r.variance),
            numeric::fmt_sig12(r.mass_check),
        ])?;
    }
    w.flush()?;
    Ok(())
}
