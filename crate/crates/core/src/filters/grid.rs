use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{predict, update, FilterState};
use crate::error::{Error, Result};
use crate::measures::{GridDensity, GridSpec, Measure};
use crate::models::{HmmSpec, KernelForm, TransitionKernel};

/// Dense transition quadrature `v′_j = h·Σ_i p(x_i, x_j) v_i`, restricted for
/// each source node to the support box of `p(x_i, ·)`.
pub(crate) fn predict_grid(g: &GridDensity, kernel: &TransitionKernel) -> Result<GridDensity> {
    if kernel.dim() != 1 {
        return Err(Error::Unsupported("grid filters are one-dimensional".into()));
    }
    if !kernel.has_density() {
        return Err(Error::MissingDensity(kernel.name().to_string()));
    }
    let h = g.spacing();
    let n = g.len();
    let origin = g.origin();
    let mut out = vec![0.0; n];
    let ar = match kernel.form() {
        KernelForm::Ar(k) => Some(k),
        _ => None,
    };
    for (i, &v) in g.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let x = g.node(i);
        let (lo, hi) = match kernel.support(&[x]) {
            Some((lo, hi)) => (lo[0], hi[0]),
            None => (f64::NEG_INFINITY, f64::INFINITY),
        };
        let j0 = ((lo - origin) / h).ceil().max(0.0);
        let j1 = ((hi - origin) / h).floor().min((n - 1) as f64);
        if j1 < j0 {
            continue;
        }
        let (j0, j1) = (j0 as usize, j1 as usize);
        if let Some(ar) = ar {
            let (b, s) = ar.scalar_params(x);
            let q = ar.noise().density();
            let scale = v * h / s.abs();
            for (j, o) in out.iter_mut().enumerate().take(j1 + 1).skip(j0) {
                *o += scale * q.eval1((origin + j as f64 * h - b) / s);
            }
        } else {
            for (j, o) in out.iter_mut().enumerate().take(j1 + 1).skip(j0) {
                // unwrap: has_density was checked above.
                *o += v * h * kernel.density(&[x], &[origin + j as f64 * h]).unwrap();
            }
        }
    }
    if out.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InsufficientMass {
            captured: 0.0,
            required: 1.0,
        });
    }
    GridDensity::new(origin, h, out)
}

/// Predictor and filter of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct GridStep {
    pub predictor: FilterState,
    pub filter: FilterState,
}

/// A grid filter that absorbs one observation at a time.
///
/// ```
/// use filterlab::filters::GridFilter;
/// use filterlab::models::Preset;
///
/// let spec = Preset::ArContracting.spec().unwrap();
/// let mut f = GridFilter::new(&spec, spec.prior(), &Preset::ArContracting.default_grid()).unwrap();
/// let step = f.step(&[0.4]).unwrap();
/// assert_eq!(step.filter.time(), 0);
/// ```
#[derive(Clone, Debug)]
pub struct GridFilter {
    spec: HmmSpec,
    last: Option<FilterState>,
    prior: FilterState,
}

impl GridFilter {
    pub fn new(spec: &HmmSpec, prior: &Measure, grid: &GridSpec) -> Result<Self> {
        if spec.state_dim() != 1 {
            return Err(Error::Unsupported("grid filters are one-dimensional".into()));
        }
        if !spec.kernel().is_identity() && !spec.kernel().has_density() {
            return Err(Error::MissingDensity(spec.kernel().name().to_string()));
        }
        Ok(Self {
            spec: spec.clone(),
            last: None,
            prior: FilterState::prior_on_grid(prior, grid)?,
        })
    }

    /// Most recent filter `π_n`, if any observation was absorbed.
    pub fn current(&self) -> Option<&FilterState> {
        self.last.as_ref()
    }

    /// Predicts (except at time 0) and updates with `y`.
    pub fn step(&mut self, y: &[f64]) -> Result<GridStep> {
        let predictor = match &self.last {
            None => self.prior.clone(),
            // Grid predict draws no random numbers.
            Some(f) => predict(f, self.spec.kernel(), &mut ChaCha8Rng::seed_from_u64(0))?,
        };
        let time = predictor.time();
        let filter = update(&predictor, y, self.spec.channel()).map_err(|e| e.at_step(time, "grid"))?;
        self.last = Some(filter.clone());
        Ok(GridStep { predictor, filter })
    }
}

/// Runs a grid filter over `observations`; step 0 updates the prior with
/// `Y_0`. An empty observation list gives an empty trace.
pub fn run_grid_filter(spec: &HmmSpec, observations: &[Vec<f64>], prior: &Measure, grid: &GridSpec) -> Result<Vec<GridStep>> {
    let mut f = GridFilter::new(spec, prior, grid)?;
    observations.iter().map(|y| f.step(y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::kalman_static;
    use crate::models::{simulate_path, ArKernel, Noise, ObservationChannel, StaticGaussianModel};

    #[test]
    fn static_gaussian_matches_kalman() {
        let model = StaticGaussianModel::default();
        let spec = model.spec().unwrap();
        let path = simulate_path(&spec, 30, 3).unwrap();
        let grid = GridSpec::new(-10.0, 0.005, 4001).unwrap();
        let steps = run_grid_filter(&spec, &path.observations, spec.prior(), &grid).unwrap();
        let kal = kalman_static(&model, model.alpha, &path.observations_1d()).unwrap();
        for (s, k) in steps.iter().zip(&kal) {
            let (m, v) = s.filter.moments();
            assert!((m - k.z).abs() < 1e-6 && (v - k.v).abs() < 1e-6, "{m} {v} vs {k:?}");
        }
    }

    #[test]
    fn empty_observations_give_empty_trace() {
        let spec = StaticGaussianModel::default().spec().unwrap();
        let grid = GridSpec::new(-5.0, 0.1, 101).unwrap();
        assert!(run_grid_filter(&spec, &[], spec.prior(), &grid).unwrap().is_empty());
    }

    #[test]
    fn missing_density_is_rejected() {
        let k = TransitionKernel::from_sampler("opaque", 1, |x, _| x.to_vec());
        let ch = ObservationChannel::identity(Noise::gaussian(1.0).unwrap());
        let spec = HmmSpec::new(k, ch, Measure::gaussian(0.0, 1.0).unwrap()).unwrap();
        let grid = GridSpec::new(-5.0, 0.1, 101).unwrap();
        assert!(matches!(GridFilter::new(&spec, spec.prior(), &grid), Err(Error::MissingDensity(_))));
    }

    #[test]
    fn degenerate_step_is_located() {
        let k = TransitionKernel::ar(ArKernel::affine(1.0, 0.0, 1.0, Noise::gaussian(1.0).unwrap()).unwrap());
        let ch = ObservationChannel::identity(Noise::uniform(0.5).unwrap());
        let spec = HmmSpec::new(k, ch, Measure::gaussian(0.0, 1.0).unwrap()).unwrap();
        let grid = GridSpec::new(-10.0, 0.05, 401).unwrap();
        let obs = vec![vec![0.0], vec![0.2], vec![50.0]];
        match run_grid_filter(&spec, &obs, spec.prior(), &grid) {
            Err(Error::RunAborted { step, .. }) => assert_eq!(step, 2),
            other => panic!("{other:?}"),
        }
    }
}
