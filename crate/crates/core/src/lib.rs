//! Forgetting of the initial condition in nonlinear filters.
//!
//! Two filters that see the same observations but start from different priors
//! `μ` and `ν` should merge over time. This crate measures how they merge:
//!
//! - [`measures`]: discrete, gridded and Gaussian probability measures, the
//!   total variation distance and the exact dual bounded-Lipschitz distance.
//! - [`models`]: transition kernels (identity, autoregressive), additive-noise
//!   observation channels, named presets and diagnostics for the model
//!   assumptions (invertible observations, noise whose characteristic function
//!   never vanishes, TV-continuous kernels).
//! - [`filters`]: grid, bootstrap particle and closed-form Gaussian filters
//!   built from a shared predict/update pair.
//! - [`stability`]: twin runs producing distance traces, decay-rate fits, and
//!   numerical checks of the two inequalities behind the forgetting argument.
//! - [`experiment`]: TOML configs, seed fan-out and the CSV/JSON artifacts
//!   consumed by the `filterlab` binary and by plotting scripts.
//!
//! ```
//! use filterlab::models::Preset;
//! use filterlab::stability::{twin_run, Method, TwinRunConfig};
//!
//! let p = Preset::StaticGaussian;
//! let (mu, nu) = p.priors();
//! let trace = twin_run(&TwinRunConfig::new(p.spec()?, mu, nu, 200, 1, Method::KalmanStatic))?;
//! let (first, last) = (trace.rows[0].bl.unwrap(), trace.last().unwrap().bl.unwrap());
//! assert!(last < first / 10.0);
//! # Ok::<(), filterlab::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod filters;
pub mod measures;
pub mod models;
pub mod numeric;
pub mod stability;

pub use error::{Error, Result};
