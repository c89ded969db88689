use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{predict, update, FilterKind, FilterState, ParticleCloud, Representation};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::models::HmmSpec;

/// Below this effective sample size the cloud has collapsed.
pub const MIN_ESS: f64 = 2.0;

/// Predictor and (weighted, pre-resampling) filter of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleStep {
    pub predictor: FilterState,
    pub filter: FilterState,
}

/// Bootstrap particle filter: propagate through the kernel sampler, weight
/// by `q_ξ(y − h(x))`, resample systematically after every step.
///
/// The random stream is consumed in a fixed pattern (`dim` uniforms per
/// particle for the prior, then per step one kernel draw per particle and one
/// resampling uniform), so two filters with the same seed share their noise
/// even when their priors differ.
#[derive(Clone, Debug)]
pub struct ParticleFilter {
    spec: HmmSpec,
    rng: ChaCha8Rng,
    next: FilterState,
    started: bool,
}

impl ParticleFilter {
    pub fn new(spec: &HmmSpec, prior: &Measure, particles: usize, seed: u64) -> Result<Self> {
        if particles < 2 {
            return Err(Error::InvalidParameter(format!("{particles} particles (need at least 2)")));
        }
        if prior.dim() != spec.state_dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.state_dim(),
                found: prior.dim(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = prior.dim();
        let mut points = Vec::with_capacity(particles * dim);
        let mut u = vec![0.0; dim];
        for _ in 0..particles {
            for ui in u.iter_mut() {
                *ui = rng.random();
            }
            points.extend(prior.quantile_sample(&u));
        }
        let cloud = ParticleCloud::uniform(dim, points)?;
        Ok(Self {
            spec: spec.clone(),
            rng,
            next: FilterState::prior(Representation::Particles(cloud)),
            started: false,
        })
    }

    pub fn step(&mut self, y: &[f64]) -> Result<ParticleStep> {
        let predictor = if self.started {
            predict(&self.next, self.spec.kernel(), &mut self.rng)?
        } else {
            self.next.clone()
        };
        self.started = true;
        let time = predictor.time();
        let filter = update(&predictor, y, self.spec.channel()).map_err(|e| e.at_step(time, "particle"))?;
        // unwrap: particle predictors update to particle filters.
        let cloud = filter.as_particles().unwrap();
        let ess = cloud.ess();
        if !(ess >= MIN_ESS) {
            return Err(Error::WeightCollapse { ess }.at_step(time, "particle"));
        }
        let resampled = systematic_resample(cloud, self.rng.random());
        self.next = FilterState::new(Representation::Particles(resampled), time, FilterKind::Filter);
        Ok(ParticleStep { predictor, filter })
    }
}

/// Systematic resampling with offset `u ∈ [0, 1)`: particle `i` is copied
/// once for every point `(u + k)/N` falling in its cumulative-weight cell.
pub fn systematic_resample(cloud: &ParticleCloud, u: f64) -> ParticleCloud {
    let n = cloud.len();
    let dim = cloud.dim();
    let mut points = Vec::with_capacity(n * dim);
    let mut cum = 0.0;
    let mut i = 0;
    for k in 0..n {
        let target = (u + k as f64) / n as f64;
        while i + 1 < n && cum + cloud.weights()[i] <= target {
            cum += cloud.weights()[i];
            i += 1;
        }
        points.extend_from_slice(cloud.point(i));
    }
    ParticleCloud {
        dim,
        points,
        weights: vec![1.0 / n as f64; n],
    }
}

/// Runs a bootstrap filter over `observations`; deterministic in `seed`.
pub fn run_particle_filter(
    spec: &HmmSpec,
    observations: &[Vec<f64>],
    prior: &Measure,
    particles: usize,
    seed: u64,
) -> Result<Vec<ParticleStep>> {
    let mut f = ParticleFilter::new(spec, prior, particles, seed)?;
    observations.iter().map(|y| f.step(y)).collect()
}
