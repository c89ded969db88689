use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ArKernel, HmmSpec, Noise, ObservationChannel, TransitionKernel};
use crate::error::{Error, Result};
use crate::measures::{GridSpec, Measure};

/// The static signal `X_k = X_0` observed as `Y_k = X_k + ξ_k` with
/// `ξ ~ N(0, 1)`, started from `μ = N(α, σ²)` or `ν = N(β, σ²)`.
///
/// Filters are Gaussian with
///
/// ```text
/// Z_k = (α + σ²·Σ_{ℓ≤k} Y_ℓ) / (1 + σ²(k+1)),    V_k = σ² / (1 + σ²(k+1))
/// ```
///
/// and `n·‖π_n^μ − π_n^ν‖_BL` stays bounded below by roughly
/// [`target_constant`](Self::target_constant), so forgetting happens at rate
/// `1/n` and not faster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticGaussianModel {
    pub alpha: f64,
    pub beta: f64,
    pub sigma2: f64,
}

impl Default for StaticGaussianModel {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: 1.0,
            sigma2: 1.0,
        }
    }
}

impl StaticGaussianModel {
    /// `σ² = 0` is accepted: both priors are then point masses.
    pub fn new(alpha: f64, beta: f64, sigma2: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("prior means {alpha}, {beta}")));
        }
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!("prior variance {sigma2}")));
        }
        Ok(Self { alpha, beta, sigma2 })
    }

    pub fn prior_mu(&self) -> Measure {
        Measure::gaussian(self.alpha, self.sigma2).expect("validated parameters")
    }

    pub fn prior_nu(&self) -> Measure {
        Measure::gaussian(self.beta, self.sigma2).expect("validated parameters")
    }

    /// Identity kernel, identity channel with `N(0, 1)` noise, prior `N(mean, σ²)`.
    pub fn spec_for_prior(&self, mean: f64) -> Result<HmmSpec> {
        HmmSpec::new(
            TransitionKernel::identity(1),
            ObservationChannel::identity(Noise::gaussian(1.0)?),
            Measure::gaussian(mean, self.sigma2)?,
        )
    }

    pub fn spec(&self) -> Result<HmmSpec> {
        self.spec_for_prior(self.alpha)
    }

    /// `|β − α| / σ² · |sin x₀|`, the limit the scaled cos lower bound tracks.
    pub fn target_constant(&self, x0: f64) -> f64 {
        (self.beta - self.alpha).abs() / self.sigma2 * x0.sin().abs()
    }
}

/// Ready-made models addressable by name.
///
/// | name | signal | observation | μ, ν |
/// |------|--------|-------------|------|
/// | `static-gaussian` | `X_k = X_0` | `X + N(0,1)` | `N(0,1)`, `N(1,1)` |
/// | `ar-random-walk` | `X + N(0,1)` | `X + N(0,25)` | `N(−2,1)`, `N(2,1)` |
/// | `ar-contracting` | `X/2 + N(0,1)` | `X + N(0,1)` | `N(−2,1)`, `N(2,1)` |
/// | `counterexample-blind` | `X_k = X_0` | `0 + N(0,1)` | `N(−1,1)`, `N(1,1)` |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    StaticGaussian,
    ArRandomWalk,
    ArContracting,
    CounterexampleBlind,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::StaticGaussian,
        Preset::ArRandomWalk,
        Preset::ArContracting,
        Preset::CounterexampleBlind,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::StaticGaussian => "static-gaussian",
            Preset::ArRandomWalk => "ar-random-walk",
            Preset::ArContracting => "ar-contracting",
            Preset::CounterexampleBlind => "counterexample-blind",
        }
    }

    /// The model with `μ` as its prior.
    pub fn spec(self) -> Result<HmmSpec> {
        let (mu, _) = self.priors();
        let g1 = || Noise::gaussian(1.0);
        let (kernel, channel) = match self {
            Preset::StaticGaussian => return StaticGaussianModel::default().spec(),
            Preset::ArRandomWalk => (
                TransitionKernel::ar(ArKernel::affine(1.0, 0.0, 1.0, g1()?)?),
                ObservationChannel::identity(Noise::gaussian(5.0)?),
            ),
            Preset::ArContracting => (
                TransitionKernel::ar(ArKernel::affine(0.5, 0.0, 1.0, g1()?)?),
                ObservationChannel::identity(g1()?),
            ),
            Preset::CounterexampleBlind => (TransitionKernel::identity(1), ObservationChannel::blind(1, g1()?)),
        };
        HmmSpec::new(kernel, channel, mu)
    }

    /// Default `(μ, ν)`.
    pub fn priors(self) -> (Measure, Measure) {
        let (a, b) = match self {
            Preset::StaticGaussian => {
                let m = StaticGaussianModel::default();
                return (m.prior_mu(), m.prior_nu());
            }
            Preset::ArRandomWalk | Preset::ArContracting => (-2.0, 2.0),
            Preset::CounterexampleBlind => (-1.0, 1.0),
        };
        (
            Measure::gaussian(a, 1.0).expect("unit variance"),
            Measure::gaussian(b, 1.0).expect("unit variance"),
        )
    }

    /// A grid wide enough for the preset's dynamics over a few hundred steps.
    pub fn default_grid(self) -> GridSpec {
        match self {
            Preset::StaticGaussian => GridSpec::new(-10.0, 0.005, 4001),
            Preset::ArRandomWalk => GridSpec::new(-100.0, 0.1, 2001),
            Preset::ArContracting => GridSpec::new(-15.0, 0.02, 1501),
            Preset::CounterexampleBlind => GridSpec::new(-10.0, 0.01, 2001),
        }
        .expect("valid preset grid")
    }

    /// The closed-form parameters, for the static-Gaussian preset only.
    pub fn static_model(self) -> Option<StaticGaussianModel> {
        matches!(self, Preset::StaticGaussian).then(StaticGaussianModel::default)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::Config(format!("unknown preset `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            assert!(p.spec().is_ok(), "{p}");
        }
        assert!("nope".parse::<Preset>().is_err());
    }

    #[test]
    fn target_constant() {
        let m = StaticGaussianModel::default();
        assert!((m.target_constant(1.0) - 1f64.sin()).abs() < 1e-15);
        assert_eq!(m.target_constant(0.0), 0.0);
        assert!(StaticGaussianModel::new(0.0, 1.0, -1.0).is_err());
    }
}
