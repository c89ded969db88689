use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Noise;
use crate::error::{Error, Result};
use crate::numeric;

type VecMap = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type MatMap = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type KernelSampler = dyn Fn(&[f64], &mut dyn RngCore) -> Vec<f64> + Send + Sync;
type KernelDensity = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type SupportBox = dyn Fn(&[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync;

/// Default half-width of the box `[-10, 10]^m` that probe states are drawn from.
pub const DEFAULT_PROBE_BOX: f64 = 10.0;

/// Transition density checks at construction must integrate to 1 within this.
const KERNEL_NORM_TOL: f64 = 1e-6;

/// Signal transition law `P(x, ·)`.
#[derive(Clone, Debug)]
pub struct TransitionKernel {
    name: String,
    dim: usize,
    form: KernelForm,
}

#[derive(Clone, Debug)]
pub enum KernelForm {
    /// `P(x, ·) = δ_x`: the static signal `X_k = X_0`.
    Identity,
    Ar(ArKernel),
    Custom(CustomKernel),
}

/// A kernel given by a sampler and, optionally, a transition density with a
/// support box for each source state.
#[derive(Clone)]
pub struct CustomKernel {
    sampler: Arc<KernelSampler>,
    density: Option<(Arc<KernelDensity>, Arc<SupportBox>)>,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("has_density", &self.density.is_some())
            .finish()
    }
}

impl TransitionKernel {
    pub fn identity(dim: usize) -> Self {
        Self {
            name: "identity".into(),
            dim,
            form: KernelForm::Identity,
        }
    }

    pub fn ar(kernel: ArKernel) -> Self {
        Self {
            name: kernel.name.clone(),
            dim: kernel.dim,
            form: KernelForm::Ar(kernel),
        }
    }

    /// Sampler-only kernel (no density; grid filters cannot use it).
    pub fn from_sampler<S>(name: impl Into<String>, dim: usize, sampler: S) -> Self
    where
        S: Fn(&[f64], &mut dyn RngCore) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            form: KernelForm::Custom(CustomKernel {
                sampler: Arc::new(sampler),
                density: None,
            }),
        }
    }

    /// Kernel with sampler and density. `support(x)` returns the box outside
    /// which `p(x, ·)` vanishes; normalization is spot-checked on a few states.
    pub fn with_density<S, D, B>(
        name: impl Into<String>,
        dim: usize,
        sampler: S,
        density: D,
        support: B,
    ) -> Result<Self>
    where
        S: Fn(&[f64], &mut dyn RngCore) -> Vec<f64> + Send + Sync + 'static,
        D: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        B: Fn(&[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    {
        let kernel = Self {
            name: name.into(),
            dim,
            form: KernelForm::Custom(CustomKernel {
                sampler: Arc::new(sampler),
                density: Some((Arc::new(density), Arc::new(support))),
            }),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..5 {
            let x = random_point(&mut rng, dim, DEFAULT_PROBE_BOX);
            let (lo, hi) = kernel.support(&x).expect("density kernel has support");
            let integral = numeric::midpoint_box(
                |z| kernel.density(&x, z).unwrap_or(0.0),
                &lo,
                &hi,
                numeric::nodes_per_dim(dim),
            );
            if (integral - 1.0).abs() > KERNEL_NORM_TOL {
                return Err(Error::DensityNotNormalized { integral });
            }
        }
        Ok(kernel)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &KernelForm {
        &self.form
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.form, KernelForm::Identity)
    }

    pub fn as_ar(&self) -> Option<&ArKernel> {
        match &self.form {
            KernelForm::Ar(k) => Some(k),
            _ => None,
        }
    }

    pub fn has_density(&self) -> bool {
        match &self.form {
            KernelForm::Identity => false,
            KernelForm::Ar(_) => true,
            KernelForm::Custom(c) => c.density.is_some(),
        }
    }

    pub fn sample(&self, x: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        match &self.form {
            KernelForm::Identity => x.to_vec(),
            KernelForm::Ar(k) => k.sample(x, rng),
            KernelForm::Custom(c) => (c.sampler)(x, rng),
        }
    }

    /// Transition density `p(x, z)`, if the kernel has one.
    pub fn density(&self, x: &[f64], z: &[f64]) -> Option<f64> {
        match &self.form {
            KernelForm::Identity => None,
            KernelForm::Ar(k) => Some(k.density(x, z)),
            KernelForm::Custom(c) => c.density.as_ref().map(|(d, _)| d(x, z)),
        }
    }

    /// Box outside which `p(x, ·)` vanishes.
    pub fn support(&self, x: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.form {
            KernelForm::Identity => None,
            KernelForm::Ar(k) => Some(k.support(x)),
            KernelForm::Custom(c) => c.density.as_ref().map(|(_, s)| s(x)),
        }
    }
}

/// Nonlinear autoregression `X_{k+1} = b(X_k) + σ(X_k) η_k` on ℝ^m with
/// `η_k` i.i.d. with density `q_η` and `‖σ(x)v‖ ≥ α‖v‖`.
#[derive(Clone)]
pub struct ArKernel {
    name: String,
    dim: usize,
    drift: Arc<VecMap>,
    dispersion: Arc<MatMap>,
    noise: Noise,
    lower_bound: f64,
    affine: Option<Affine>,
}

/// `b(x) = a·x + c`, `σ ≡ s` in one dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub a: f64,
    pub c: f64,
    pub s: f64,
}

impl fmt::Debug for ArKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArKernel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("noise", &self.noise)
            .field("lower_bound", &self.lower_bound)
            .field("affine", &self.affine)
            .finish()
    }
}

impl ArKernel {
    /// General constructor. Spot-checks the dispersion lower bound on 200
    /// random `(x, v)` pairs and the normalization of `p(x, ·)` on a few
    /// states, all drawn from `[-10, 10]^m`.
    pub fn new<B, S>(
        name: impl Into<String>,
        dim: usize,
        drift: B,
        dispersion: S,
        noise: Noise,
        lower_bound: f64,
    ) -> Result<Self>
    where
        B: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        S: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self::build(name.into(), dim, Arc::new(drift), Arc::new(dispersion), noise, lower_bound, None)
    }

    /// One-dimensional kernel from scalar drift and dispersion.
    pub fn scalar<B, S>(name: impl Into<String>, drift: B, dispersion: S, noise: Noise, lower_bound: f64) -> Result<Self>
    where
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(
            name.into(),
            1,
            Arc::new(move |x: &[f64]| vec![drift(x[0])]),
            Arc::new(move |x: &[f64]| DMatrix::from_element(1, 1, dispersion(x[0]))),
            noise,
            lower_bound,
            None,
        )
    }

    /// `X_{k+1} = a X_k + c + s η_k` in one dimension.
    pub fn affine(a: f64, c: f64, s: f64, noise: Noise) -> Result<Self> {
        if !(s.abs() > 0.0) {
            return Err(Error::InvalidParameter(format!("dispersion {s} must be nonzero")));
        }
        Self::build(
            format!("ar(b(x) = {a}x + {c}, σ = {s})"),
            1,
            Arc::new(move |x: &[f64]| vec![a * x[0] + c]),
            Arc::new(move |_: &[f64]| DMatrix::from_element(1, 1, s)),
            noise,
            s.abs(),
            Some(Affine { a, c, s }),
        )
    }

    fn build(
        name: String,
        dim: usize,
        drift: Arc<VecMap>,
        dispersion: Arc<MatMap>,
        noise: Noise,
        lower_bound: f64,
        affine: Option<Affine>,
    ) -> Result<Self> {
        if noise.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: noise.dim(),
            });
        }
        if !(lower_bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dispersion lower bound {lower_bound} must be positive"
            )));
        }
        let kernel = Self {
            name,
            dim,
            drift,
            dispersion,
            noise,
            lower_bound,
            affine,
        };
        kernel.check_lower_bound()?;
        kernel.check_normalization()?;
        Ok(kernel)
    }

    fn check_lower_bound(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let x = random_point(&mut rng, self.dim, DEFAULT_PROBE_BOX);
            let v = random_unit(&mut rng, self.dim);
            let sigma = (self.dispersion)(&x);
            if sigma.nrows() != self.dim || sigma.ncols() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: sigma.nrows(),
                });
            }
            let norm = (&sigma * DVector::from_column_slice(&v)).norm();
            if norm < self.lower_bound * (1.0 - 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "‖σ(x)v‖ = {norm} < α = {} at x = {x:?}",
                    self.lower_bound
                )));
            }
        }
        Ok(())
    }

    fn check_normalization(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..3 {
            let x = random_point(&mut rng, self.dim, DEFAULT_PROBE_BOX);
            let (lo, hi) = self.support(&x);
            let integral = numeric::midpoint_box(|z| self.density(&x, z), &lo, &hi, numeric::nodes_per_dim(self.dim));
            if (integral - 1.0).abs() > KERNEL_NORM_TOL {
                return Err(Error::DensityNotNormalized { integral });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise(&self) -> &Noise {
        &self.noise
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn affine_params(&self) -> Option<Affine> {
        self.affine
    }

    pub fn drift(&self, x: &[f64]) -> Vec<f64> {
        (self.drift)(x)
    }

    pub fn dispersion(&self, x: &[f64]) -> DMatrix<f64> {
        (self.dispersion)(x)
    }

    /// Drift and dispersion at a scalar state (1-d kernels).
    pub fn scalar_params(&self, x: f64) -> (f64, f64) {
        if let Some(Affine { a, c, s }) = self.affine {
            return (a * x + c, s);
        }
        ((self.drift)(&[x])[0], (self.dispersion)(&[x])[(0, 0)])
    }

    pub fn sample(&self, x: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        let eta = self.noise.sample(rng);
        if self.dim == 1 {
            let (b, s) = self.scalar_params(x[0]);
            return vec![b + s * eta[0]];
        }
        let b = DVector::from_vec((self.drift)(x));
        let out = b + (self.dispersion)(x) * DVector::from_vec(eta);
        out.as_slice().to_vec()
    }

    /// `p(x, z) = q_η(σ(x)⁻¹(z − b(x))) / |det σ(x)|`.
    pub fn density(&self, x: &[f64], z: &[f64]) -> f64 {
        let q = self.noise.density();
        if self.dim == 1 {
            let (b, s) = self.scalar_params(x[0]);
            return q.eval1((z[0] - b) / s) / s.abs();
        }
        let sigma = (self.dispersion)(x);
        let b = (self.drift)(x);
        let diff = DVector::from_iterator(self.dim, z.iter().zip(&b).map(|(zi, bi)| zi - bi));
        let Some(u) = sigma.clone().lu().solve(&diff) else {
            return 0.0;
        };
        q.eval(u.as_slice()) / sigma.determinant().abs()
    }

    /// Bounding box of the support of `p(x, ·)`.
    pub fn support(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let r = self.noise.density().radius();
        let b = (self.drift)(x);
        let sigma = (self.dispersion)(x);
        let mut lo = Vec::with_capacity(self.dim);
        let mut hi = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let extent: f64 = (0..self.dim).map(|k| sigma[(i, k)].abs()).sum::<f64>() * r;
            lo.push(b[i] - extent);
            hi.push(b[i] + extent);
        }
        (lo, hi)
    }
}

pub(crate) fn random_point(rng: &mut dyn RngCore, dim: usize, half_width: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| half_width * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}

pub(crate) fn random_unit(rng: &mut dyn RngCore, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
