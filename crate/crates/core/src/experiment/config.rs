use std::path::PathBuf;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, GridSpec, Measure};
use crate::models::{ArKernel, HmmSpec, Noise, ObservationChannel, Preset, StaticGaussianModel, TransitionKernel};
use crate::stability::{Distances, Method};

/// An experiment as written in a TOML file. Every key is optional; a preset
/// supplies the model, priors and grid, and explicit keys override it.
///
/// ```toml
/// preset = "ar-random-walk"
/// horizon = 200
/// seeds = [1, 2, 3]
/// method = "grid"
/// distances = ["bl", "tv"]
/// out = "runs/rw"
///
/// [grid]
/// origin = -100.0
/// spacing = 0.1
/// count = 2001
/// ```
///
/// An inline model replaces the preset:
///
/// ```toml
/// [model.kernel]
/// kind = "ar"
/// a = 0.9
/// s = 1.0
///
/// [model.channel]
/// kind = "identity"
/// noise = { kind = "uniform", half_width = 1.0 }
///
/// [priors]
/// mu = { kind = "gaussian", mean = -1.0, variance = 1.0 }
/// nu = { kind = "atoms", atoms = [0.0, 2.0], weights = [0.5, 0.5] }
/// ```
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<Preset>,
    pub model: Option<ModelConfig>,
    pub priors: Option<PriorsConfig>,
    pub horizon: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub method: Option<MethodName>,
    pub grid: Option<GridSpec>,
    pub particles: Option<usize>,
    pub distances: Option<Vec<DistanceName>>,
    pub out: Option<PathBuf>,
    pub record_predictor: Option<bool>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Grid,
    Particle,
    KalmanStatic,
}

impl std::str::FromStr for MethodName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(MethodName::Grid),
            "particle" => Ok(MethodName::Particle),
            "kalman-static" => Ok(MethodName::KalmanStatic),
            _ => Err(Error::Config(format!(
                "unknown method `{s}` (expected grid, particle or kalman-static)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DistanceName {
    Bl,
    Tv,
}

impl std::str::FromStr for DistanceName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bl" => Ok(DistanceName::Bl),
            "tv" => Ok(DistanceName::Tv),
            _ => Err(Error::Config(format!("unknown distance `{s}` (expected bl or tv)"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kernel: KernelConfig,
    pub channel: ChannelConfig,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelConfig {
    /// `X_{k+1} = X_k`.
    Identity,
    /// `X_{k+1} = a·X_k + c + s·η`.
    Ar {
        a: f64,
        #[serde(default)]
        c: f64,
        s: f64,
        #[serde(default)]
        noise: NoiseConfig,
    },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelConfig {
    Identity {
        #[serde(default)]
        noise: NoiseConfig,
    },
    Linear {
        gain: f64,
        #[serde(default)]
        noise: NoiseConfig,
    },
    /// `h ≡ 0`.
    Blind {
        #[serde(default)]
        noise: NoiseConfig,
    },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseConfig {
    Gaussian { std: f64 },
    Uniform { half_width: f64 },
    Triangular { half_width: f64 },
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig::Gaussian { std: 1.0 }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PriorsConfig {
    pub mu: PriorConfig,
    pub nu: PriorConfig,
    /// Law of `X_0` for the simulated path, when it is neither `μ` nor `ν`.
    pub gamma: Option<PriorConfig>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PriorConfig {
    Gaussian { mean: f64, variance: f64 },
    Atoms { atoms: Vec<f64>, weights: Vec<f64> },
}

impl NoiseConfig {
    fn build(&self) -> Result<Noise> {
        match *self {
            NoiseConfig::Gaussian { std } => Noise::gaussian(std),
            NoiseConfig::Uniform { half_width } => Noise::uniform(half_width),
            NoiseConfig::Triangular { half_width } => Noise::triangular(half_width),
        }
    }
}

impl PriorConfig {
    fn build(&self) -> Result<Measure> {
        match self {
            PriorConfig::Gaussian { mean, variance } => Measure::gaussian(*mean, *variance),
            PriorConfig::Atoms { atoms, weights } => Ok(DiscreteMeasure::on_line(atoms, weights)?.into()),
        }
    }
}

impl ModelConfig {
    fn build(&self, prior: Measure) -> Result<HmmSpec> {
        let kernel = match &self.kernel {
            KernelConfig::Identity => TransitionKernel::identity(1),
            KernelConfig::Ar { a, c, s, noise } => TransitionKernel::ar(ArKernel::affine(*a, *c, *s, noise.build()?)?),
        };
        let channel = match &self.channel {
            ChannelConfig::Identity { noise } => ObservationChannel::identity(noise.build()?),
            ChannelConfig::Linear { gain, noise } => ObservationChannel::linear(*gain, noise.build()?)?,
            ChannelConfig::Blind { noise } => ObservationChannel::blind(1, noise.build()?),
        };
        HmmSpec::new(kernel, channel, prior)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub horizon: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub method: Option<MethodName>,
    pub out: Option<PathBuf>,
    pub distances: Option<Vec<DistanceName>>,
}

/// A fully specified experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    /// Preset name, or `custom` for inline models.
    pub name: String,
    pub spec: HmmSpec,
    pub prior_mu: Measure,
    pub prior_nu: Measure,
    pub observation_prior: Option<Measure>,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub method: Method,
    pub distances: Distances,
    pub record_predictor: bool,
    pub out: PathBuf,
    /// `(α, β, σ²)` when the model is the static-Gaussian one.
    pub static_model: Option<StaticGaussianModel>,
}

pub const DEFAULT_HORIZON: usize = 100;
pub const DEFAULT_PARTICLES: usize = 2000;

impl ExperimentConfig {
    /// Parses TOML, rejecting unknown keys.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Applies overrides and defaults and builds every model object.
    ///
    /// Without a method, the static-Gaussian model uses its closed form and
    /// everything else runs on a grid.
    pub fn resolve(mut self, overrides: Overrides) -> Result<Experiment> {
        if overrides.preset.is_some() {
            self.preset = overrides.preset;
        }
        self.horizon = overrides.horizon.or(self.horizon);
        self.seeds = overrides.seeds.or(self.seeds);
        self.method = overrides.method.or(self.method);
        self.out = overrides.out.or(self.out);
        self.distances = overrides.distances.or(self.distances);

        let (name, spec, priors) = match (&self.model, self.preset) {
            (Some(_), Some(_)) => return Err(Error::Config("give either `preset` or `[model]`, not both".into())),
            (None, None) => return Err(Error::Config("no model: set `preset` or a `[model]` table".into())),
            (None, Some(p)) => (p.name().to_string(), p.spec()?, p.priors()),
            (Some(m), None) => {
                let Some(pc) = &self.priors else {
                    return Err(Error::Config("an inline `[model]` needs a `[priors]` table".into()));
                };
                let mu = pc.mu.build()?;
                ("custom".to_string(), m.build(mu.clone())?, (mu, pc.nu.build()?))
            }
        };
        let (prior_mu, prior_nu) = match (&self.priors, &self.model) {
            (Some(pc), None) => (pc.mu.build()?, pc.nu.build()?),
            _ => priors,
        };
        let observation_prior = self
            .priors
            .as_ref()
            .and_then(|p| p.gamma.as_ref())
            .map(PriorConfig::build)
            .transpose()?;

        let static_model = static_model(&spec, &prior_mu, &prior_nu);
        let method_name = self.method.unwrap_or(if static_model.is_some() {
            MethodName::KalmanStatic
        } else {
            MethodName::Grid
        });
        let grid = match (self.grid, self.preset) {
            (Some(g), _) => g,
            (None, Some(p)) => p.default_grid(),
            (None, None) => GridSpec::new(-20.0, 0.01, 4001)?,
        };
        grid.validate()?;
        let method = match method_name {
            MethodName::Grid => Method::Grid(grid),
            MethodName::Particle => Method::Particle {
                particles: self.particles.unwrap_or(DEFAULT_PARTICLES),
                tv_grid: grid,
            },
            MethodName::KalmanStatic => {
                if static_model.is_none() {
                    return Err(Error::Config(
                        "method kalman-static needs the static-Gaussian model with equal-variance Gaussian priors"
                            .into(),
                    ));
                }
                Method::KalmanStatic
            }
        };
        let distances = match &self.distances {
            None => Distances::default(),
            Some(list) if list.is_empty() => return Err(Error::Config("`distances` is empty".into())),
            Some(list) => Distances {
                bl: list.contains(&DistanceName::Bl),
                tv: list.contains(&DistanceName::Tv),
            },
        };
        let horizon = self.horizon.unwrap_or(DEFAULT_HORIZON);
        if horizon == 0 {
            return Err(Error::Config("`horizon` must be at least 1".into()));
        }
        let seeds = self.seeds.unwrap_or_else(|| vec![0]);
        if seeds.is_empty() {
            return Err(Error::Config("`seeds` is empty".into()));
        }
        Ok(Experiment {
            name,
            spec,
            prior_mu,
            prior_nu,
            observation_prior,
            horizon,
            seeds,
            method,
            distances,
            record_predictor: self.record_predictor.unwrap_or(false),
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
            static_model,
        })
    }
}

fn static_model(spec: &HmmSpec, mu: &Measure, nu: &Measure) -> Option<StaticGaussianModel> {
    let ch = spec.channel();
    if !spec.kernel().is_identity() || ch.gain() != Some(1.0) || ch.noise().gaussian_std() != Some(1.0) {
        return None;
    }
    match (mu, nu) {
        (Measure::Gaussian(a), Measure::Gaussian(b)) if a.dim() == 1 && a.variance() == b.variance() => {
            StaticGaussianModel::new(a.mean()[0], b.mean()[0], a.variance()[0]).ok()
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::from_toml("preset = \"static-gaussian\"\nhorizn = 5\n").unwrap_err();
        assert!(err.to_string().contains("horizn"), "{err}");
    }

    #[test]
    fn preset_defaults() {
        let e = ExperimentConfig::from_toml("preset = \"static-gaussian\"")
            .unwrap()
            .resolve(Overrides::default())
            .unwrap();
        assert_eq!(e.method, Method::KalmanStatic);
        assert_eq!(e.horizon, DEFAULT_HORIZON);
        let e = ExperimentConfig::from_toml("preset = \"ar-random-walk\"\nseeds = [3, 4]")
            .unwrap()
            .resolve(Overrides::default())
            .unwrap();
        assert!(matches!(e.method, Method::Grid(_)));
        assert_eq!(e.seeds, vec![3, 4]);
    }

    #[test]
    fn inline_model() {
        let text = r#"
            horizon = 10
            [model.kernel]
            kind = "ar"
            a = 0.9
            s = 1.0
            [model.channel]
            kind = "identity"
            noise = { kind = "uniform", half_width = 1.0 }
            [priors]
            mu = { kind = "gaussian", mean = -1.0, variance = 1.0 }
            nu = { kind = "atoms", atoms = [0.0, 2.0], weights = [0.5, 0.5] }
        "#;
        let e = ExperimentConfig::from_toml(text).unwrap().resolve(Overrides::default()).unwrap();
        assert_eq!(e.name, "custom");
        assert!(e.static_model.is_none());
        assert!(e.spec.kernel().as_ar().is_some());
    }

    #[test]
    fn kalman_static_needs_static_model() {
        let cfg = ExperimentConfig::from_toml("preset = \"ar-contracting\"\nmethod = \"kalman-static\"").unwrap();
        assert!(matches!(cfg.resolve(Overrides::default()), Err(Error::Config(_))));
    }
}
