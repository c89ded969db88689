//! Twin-filter experiments.
//!
//! [`twin_run`] simulates one observation path and runs two filters on it,
//! started from different priors `μ` and `ν`. The per-step distances between
//! them form a [`StabilityTrace`]. If the filters forget their initial
//! condition, the trace decays. [`estimate_rate`] classifies how fast it
//! decays. [`check_coupling_bound`] and [`filter_predictor_tv_check`] test two
//! inequalities that the forgetting argument is built on, on concrete
//! instances.

mod inequalities;
mod rate;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use inequalities::{check_coupling_bound, filter_predictor_tv_check, CouplingCheck, PredictorTvCheck};
pub use rate::{estimate_rate, liminf_constant, tail_window, LiminfEstimate, RateClass, RateFit};

use crate::error::{Error, Result};
use crate::filters::{kalman_static, predict, update, FilterState, GridFilter, ParticleFilter};
use crate::measures::{bl_between, discretize, tv_distance, tv_gaussian_1d, GaussianMeasure, GridSpec, Measure};
use crate::models::{simulate_path_from, HmmSpec, StaticGaussianModel};

/// How the two filters are computed.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Deterministic quadrature on a shared 1-d lattice.
    Grid(GridSpec),
    /// Bootstrap filters on common random numbers. TV is measured after
    /// projecting both clouds onto `tv_grid`; BL uses the atoms directly.
    Particle { particles: usize, tv_grid: GridSpec },
    /// Closed-form Gaussian filters of the static model (identity kernel,
    /// identity channel with `N(0, 1)` noise, Gaussian priors of equal
    /// variance).
    KalmanStatic,
}

/// Which distances to record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Distances {
    pub bl: bool,
    pub tv: bool,
}

impl Default for Distances {
    fn default() -> Self {
        Self { bl: true, tv: true }
    }
}

#[derive(Clone, Debug)]
pub struct TwinRunConfig {
    /// Model. Its own prior is ignored in favour of the two below.
    pub spec: HmmSpec,
    pub prior_mu: Measure,
    pub prior_nu: Measure,
    /// Law of `X_0` for the simulated path; `μ` when absent.
    pub observation_prior: Option<Measure>,
    pub horizon: usize,
    pub seed: u64,
    pub method: Method,
    pub distances: Distances,
    pub record_predictor: bool,
}

impl TwinRunConfig {
    pub fn new(spec: HmmSpec, prior_mu: Measure, prior_nu: Measure, horizon: usize, seed: u64, method: Method) -> Self {
        Self {
            spec,
            prior_mu,
            prior_nu,
            observation_prior: None,
            horizon,
            seed,
            method,
            distances: Distances::default(),
            record_predictor: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        let m = self.spec.state_dim();
        let priors = [Some(&self.prior_mu), Some(&self.prior_nu), self.observation_prior.as_ref()];
        for p in priors.into_iter().flatten() {
            if p.dim() != m {
                return Err(Error::DimensionMismatch { expected: m, found: p.dim() });
            }
        }
        Ok(())
    }
}

/// Distances between the two filters (and predictors) at one step. Absent
/// entries were not requested or do not apply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub bl: Option<f64>,
    pub tv: Option<f64>,
    pub predictor_bl: Option<f64>,
    pub predictor_tv: Option<f64>,
    /// `|∫cos dπ_n^μ − ∫cos dπ_n^ν|`, recorded for static signals.
    pub cos_lower: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityTrace {
    pub rows: Vec<TraceRow>,
    /// `X_0` of the simulated path.
    pub initial_state: Vec<f64>,
    /// Seconds spent in [`twin_run`].
    pub wall_time: f64,
}

impl StabilityTrace {
    pub fn bl(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.bl.unwrap_or(f64::NAN)).collect()
    }

    pub fn tv(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.tv.unwrap_or(f64::NAN)).collect()
    }

    pub fn cos_lower(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.cos_lower.unwrap_or(f64::NAN)).collect()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }
}

/// `e^{−v/2}·|cos z_μ − cos z_ν|`: the gap in `∫cos` between `N(z_μ, v)` and
/// `N(z_ν, v)`. Since `cos` is bounded by 1 and 1-Lipschitz it is a lower
/// bound on their BL distance.
pub fn cos_bl_lower_bound(z_mu: f64, v: f64, z_nu: f64) -> f64 {
    (-0.5 * v).exp() * (z_mu.cos() - z_nu.cos()).abs()
}

/// Runs the two filters on one simulated observation path.
///
/// Observations come from `X_0 ~ μ` (or the configured observation prior).
/// Row `n` compares `π_n^μ` with `π_n^ν`, for `n = 0 … horizon − 1`. A
/// degenerate update aborts with [`Error::RunAborted`] tagged `mu` or `nu`.
pub fn twin_run(cfg: &TwinRunConfig) -> Result<StabilityTrace> {
    cfg.validate()?;
    let start = Instant::now();
    let obs_prior = cfg.observation_prior.as_ref().unwrap_or(&cfg.prior_mu);
    let path = simulate_path_from(&cfg.spec, obs_prior, cfg.horizon, cfg.seed)?;
    let rows = match &cfg.method {
        Method::Grid(grid) => grid_twin(cfg, grid, &path.observations)?,
        Method::Particle { particles, tv_grid } => particle_twin(cfg, *particles, tv_grid, &path.observations)?,
        Method::KalmanStatic => kalman_twin(cfg, &path.observations_1d())?,
    };
    Ok(StabilityTrace {
        rows,
        initial_state: path.states[0].clone(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn retag(e: Error, tag: &str, step: usize) -> Error {
    match e {
        Error::RunAborted { step, source, .. } => Error::RunAborted {
            step,
            tag: tag.into(),
            source,
        },
        other => other.at_step(step, tag),
    }
}

fn pair_distances(a: &Measure, b: &Measure, which: Distances) -> Result<(Option<f64>, Option<f64>)> {
    let bl = which.bl.then(|| bl_between(a, b)).transpose()?;
    let tv = which.tv.then(|| tv_distance(a, b)).transpose()?;
    Ok((bl, tv))
}

fn cos_gap(a: &Measure, b: &Measure) -> Option<f64> {
    let integral = |m: &Measure| -> Option<f64> {
        match m {
            Measure::Grid(g) => Some(g.masses().map(|(x, w)| w * x.cos()).sum()),
            Measure::Discrete(d) => Some(d.iter().map(|(x, w)| w * x[0].cos()).sum()),
            Measure::Gaussian(g) => Some((-0.5 * g.variance()[0]).exp() * g.mean()[0].cos()),
        }
    };
    Some((integral(a)? - integral(b)?).abs())
}

fn grid_twin(cfg: &TwinRunConfig, grid: &GridSpec, obs: &[Vec<f64>]) -> Result<Vec<TraceRow>> {
    let mut fm = GridFilter::new(&cfg.spec, &cfg.prior_mu, grid)?;
    let mut fnu = GridFilter::new(&cfg.spec, &cfg.prior_nu, grid)?;
    let static_signal = cfg.spec.kernel().is_identity() && cfg.spec.state_dim() == 1;
    let mut rows = Vec::with_capacity(obs.len());
    for (n, y) in obs.iter().enumerate() {
        let a = fm.step(y).map_err(|e| retag(e, "mu", n))?;
        let b = fnu.step(y).map_err(|e| retag(e, "nu", n))?;
        let (ma, mb) = (a.filter.measure(), b.filter.measure());
        let (bl, tv) = pair_distances(&ma, &mb, cfg.distances)?;
        let mut row = TraceRow {
            step: n,
            bl,
            tv,
            cos_lower: if static_signal { cos_gap(&ma, &mb) } else { None },
            ..Default::default()
        };
        if cfg.record_predictor {
            let (pbl, ptv) = pair_distances(&a.predictor.measure(), &b.predictor.measure(), cfg.distances)?;
            row.predictor_bl = pbl;
            row.predictor_tv = ptv;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn particle_twin(cfg: &TwinRunConfig, particles: usize, tv_grid: &GridSpec, obs: &[Vec<f64>]) -> Result<Vec<TraceRow>> {
    // Both filters share one seed, distinct from the path's.
    let filter_seed = cfg.seed ^ 0x9E37_79B9_7F4A_7C15;
    let mut fm = ParticleFilter::new(&cfg.spec, &cfg.prior_mu, particles, filter_seed)?;
    let mut fnu = ParticleFilter::new(&cfg.spec, &cfg.prior_nu, particles, filter_seed)?;
    let distances = |a: &FilterState, b: &FilterState| -> Result<(Option<f64>, Option<f64>)> {
        let (ma, mb) = (a.measure(), b.measure());
        let bl = cfg.distances.bl.then(|| bl_between(&ma, &mb)).transpose()?;
        let tv = if cfg.distances.tv {
            let ga = discretize(&ma, tv_grid.origin, tv_grid.spacing, tv_grid.count)?;
            let gb = discretize(&mb, tv_grid.origin, tv_grid.spacing, tv_grid.count)?;
            Some(tv_distance(&ga.into(), &gb.into())?)
        } else {
            None
        };
        Ok((bl, tv))
    };
    let mut rows = Vec::with_capacity(obs.len());
    for (n, y) in obs.iter().enumerate() {
        let a = fm.step(y).map_err(|e| retag(e, "mu", n))?;
        let b = fnu.step(y).map_err(|e| retag(e, "nu", n))?;
        let (bl, tv) = distances(&a.filter, &b.filter)?;
        let mut row = TraceRow {
            step: n,
            bl,
            tv,
            ..Default::default()
        };
        if cfg.record_predictor {
            (row.predictor_bl, row.predictor_tv) = distances(&a.predictor, &b.predictor)?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Reads `(α, β, σ²)` off two Gaussian priors of equal variance and checks
/// that the model is the static-Gaussian one.
pub fn static_model_of(cfg: &TwinRunConfig) -> Result<StaticGaussianModel> {
    let ch = cfg.spec.channel();
    let ok_model = cfg.spec.kernel().is_identity()
        && cfg.spec.state_dim() == 1
        && ch.gain() == Some(1.0)
        && ch.noise().gaussian_std() == Some(1.0);
    if !ok_model {
        return Err(Error::Config(
            "kalman-static needs the static signal with identity channel and N(0, 1) noise".into(),
        ));
    }
    let (Measure::Gaussian(mu), Measure::Gaussian(nu)) = (&cfg.prior_mu, &cfg.prior_nu) else {
        return Err(Error::Config("kalman-static needs Gaussian priors".into()));
    };
    if mu.variance()[0] != nu.variance()[0] {
        return Err(Error::Config("kalman-static needs priors of equal variance".into()));
    }
    StaticGaussianModel::new(mu.mean()[0], nu.mean()[0], mu.variance()[0])
}

fn kalman_twin(cfg: &TwinRunConfig, obs: &[f64]) -> Result<Vec<TraceRow>> {
    let model = static_model_of(cfg)?;
    let a = kalman_static(&model, model.alpha, obs)?;
    let b = kalman_static(&model, model.beta, obs)?;
    let gauss = |z: f64, v: f64| -> Result<Measure> { Ok(GaussianMeasure::scalar(z, v)?.into()) };
    let distances = |za: f64, zb: f64, v: f64| -> Result<(Option<f64>, Option<f64>)> {
        let bl = cfg.distances.bl.then(|| bl_between(&gauss(za, v)?, &gauss(zb, v)?)).transpose()?;
        let tv = cfg.distances.tv.then(|| tv_gaussian_1d(za, v, zb, v));
        Ok((bl, tv))
    };
    let mut rows = Vec::with_capacity(obs.len());
    for n in 0..obs.len() {
        let (bl, tv) = distances(a[n].z, b[n].z, a[n].v)?;
        let mut row = TraceRow {
            step: n,
            bl,
            tv,
            cos_lower: Some(cos_bl_lower_bound(a[n].z, a[n].v, b[n].z)),
            ..Default::default()
        };
        if cfg.record_predictor {
            // The static kernel makes π_{n−} = π_{n−1}, and π_{0−} the prior.
            let (za, zb, v) = if n == 0 {
                (model.alpha, model.beta, model.sigma2)
            } else {
                (a[n - 1].z, b[n - 1].z, a[n - 1].v)
            };
            (row.predictor_bl, row.predictor_tv) = distances(za, zb, v)?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Runs both grid filters through `observations` and returns the predictors
/// `π_{n−}^μ`, `π_{n−}^ν` for `n = observations.len()`.
pub(crate) fn grid_predictors(
    spec: &HmmSpec,
    prior_mu: &Measure,
    prior_nu: &Measure,
    grid: &GridSpec,
    observations: &[Vec<f64>],
) -> Result<(FilterState, FilterState)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut out = Vec::with_capacity(2);
    for (prior, tag) in [(prior_mu, "mu"), (prior_nu, "nu")] {
        let mut state = FilterState::prior_on_grid(prior, grid)?;
        for (n, y) in observations.iter().enumerate() {
            let filter = update(&state, y, spec.channel()).map_err(|e| retag(e, tag, n))?;
            state = predict(&filter, spec.kernel(), &mut rng)?;
        }
        out.push(state);
    }
    let b = out.pop().unwrap();
    let a = out.pop().unwrap();
    Ok((a, b))
}
