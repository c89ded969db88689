//! Hidden Markov model building blocks.
//!
//! A model is a signal `X_{k+1} ~ P(X_k, ·)` observed through an additive
//! channel `Y_k = h(X_k) + ξ_k`. [`HmmSpec`] bundles a [`TransitionKernel`],
//! an [`ObservationChannel`] and a prior. [`Preset`] names the ready-made
//! models, and [`assumption_report`] runs the diagnostics that tell whether a
//! model has invertible, informative observations and a TV-continuous kernel.

mod ar;
mod channel;
mod checks;
mod kernel;
mod noise;
mod presets;
mod simulate;

pub use ar::{ar_kernel_tv, kernel_tv_modulus, kernel_tv_modulus_in, ModulusCurve};
pub use channel::ObservationChannel;
pub use checks::{assumption_report, char_fn_min, char_fn_min_tol, CheckReport, FOURIER_TOLERANCE};
pub use kernel::{Affine, ArKernel, CustomKernel, KernelForm, TransitionKernel, DEFAULT_PROBE_BOX};
pub use noise::Noise;
pub use presets::{Preset, StaticGaussianModel};
pub use simulate::{simulate_path, simulate_path_from, SimulatedPath};

use crate::error::{Error, Result};
use crate::measures::Measure;

/// Kernel, channel and prior of one hidden Markov model.
#[derive(Clone, Debug)]
pub struct HmmSpec {
    kernel: TransitionKernel,
    channel: ObservationChannel,
    prior: Measure,
}

impl HmmSpec {
    /// Checks that the kernel, channel and prior agree on the state dimension.
    pub fn new(kernel: TransitionKernel, channel: ObservationChannel, prior: Measure) -> Result<Self> {
        let m = kernel.dim();
        for found in [channel.state_dim(), prior.dim()] {
            if found != m {
                return Err(Error::DimensionMismatch { expected: m, found });
            }
        }
        Ok(Self { kernel, channel, prior })
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.kernel
    }

    pub fn channel(&self) -> &ObservationChannel {
        &self.channel
    }

    pub fn prior(&self) -> &Measure {
        &self.prior
    }

    pub fn state_dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn obs_dim(&self) -> usize {
        self.channel.obs_dim()
    }

    pub fn with_prior(&self, prior: Measure) -> Result<Self> {
        Self::new(self.kernel.clone(), self.channel.clone(), prior)
    }
}
