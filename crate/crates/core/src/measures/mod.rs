//! Probability measures on ℝ^d and the two distances stability is stated in.
//!
//! Three carriers are supported:
//!
//! | Type | Used for |
//! |------|----------|
//! | [`DiscreteMeasure`] | particle clouds, atomic priors, test measures |
//! | [`GridDensity`] | grid filters and noise densities on a 1-d lattice |
//! | [`GaussianMeasure`] | closed-form filters of the static Gaussian model |
//!
//! Total variation uses the sup-norm convention `sup_{|f|≤1} |∫f da − ∫f db|`,
//! which equals `∫|da − db|` and ranges over `[0, 2]`. This is twice the
//! "probabilist's" `sup_A |a(A) − b(A)|`.
//!
//! The dual bounded-Lipschitz distance is the same supremum restricted to
//! functions with `|f| ≤ 1` and Lipschitz constant `≤ 1` (Euclidean metric).
//! It is computed exactly on discrete supports; see [`bl`].

pub mod bl;
pub mod grid;
pub mod tv;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric;

pub use bl::{bl_between, bl_distance, bl_distance_lp, bl_signed_sup};
pub use grid::{convolve_density, convolve_density_truncated, discretize, resample, GridSpec};
pub use tv::{tv_distance, tv_gaussian_1d};

/// Weight sums must match 1 this closely before renormalization.
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A finitely supported probability measure. Atoms are stored flat, `dim`
/// coordinates per atom, sorted lexicographically with duplicates merged and
/// zero weights dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure whose weights already sum to one (within 1e-9).
    pub fn new(dim: usize, atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total = validate_weights(dim, &atoms, &weights)?;
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self::canonical(dim, atoms, weights, total))
    }

    /// Builds a measure from nonnegative weights with positive total.
    pub fn from_unnormalized(dim: usize, atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total = validate_weights(dim, &atoms, &weights)?;
        Ok(Self::canonical(dim, atoms, weights, total))
    }

    pub fn on_line(points: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(1, points.to_vec(), weights.to_vec())
    }

    pub fn dirac(point: &[f64]) -> Self {
        Self {
            dim: point.len(),
            atoms: point.to_vec(),
            weights: vec![1.0],
        }
    }

    pub fn dirac1(x: f64) -> Self {
        Self::dirac(&[x])
    }

    fn canonical(dim: usize, atoms: Vec<f64>, weights: Vec<f64>, total: f64) -> Self {
        let n = weights.len();
        let mut order: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
        order.sort_by(|&i, &j| cmp_points(&atoms[i * dim..(i + 1) * dim], &atoms[j * dim..(j + 1) * dim]));
        let mut out_atoms: Vec<f64> = Vec::with_capacity(order.len() * dim);
        let mut out_weights: Vec<f64> = Vec::with_capacity(order.len());
        for i in order {
            let p = &atoms[i * dim..(i + 1) * dim];
            let w = weights[i] / total;
            let k = out_weights.len();
            if k > 0 && &out_atoms[(k - 1) * dim..k * dim] == p {
                out_weights[k - 1] += w;
            } else {
                out_atoms.extend_from_slice(p);
                out_weights.push(w);
            }
        }
        Self {
            dim,
            atoms: out_atoms,
            weights: out_weights,
        }
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

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.atoms
            .chunks(self.dim)
            .zip(self.weights.iter().copied())
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (x, w) in self.iter() {
            for (mk, xk) in m.iter_mut().zip(x) {
                *mk += w * xk;
            }
        }
        m
    }

    /// Per-coordinate variance.
    pub fn variance(&self) -> Vec<f64> {
        let m = self.mean();
        let mut v = vec![0.0; self.dim];
        for (x, w) in self.iter() {
            for k in 0..self.dim {
                v[k] += w * (x[k] - m[k]).powi(2);
            }
        }
        v
    }
}

fn validate_weights(dim: usize, atoms: &[f64], weights: &[f64]) -> Result<f64> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if weights.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    if atoms.len() != weights.len() * dim {
        return Err(Error::DimensionMismatch {
            expected: weights.len() * dim,
            found: atoms.len(),
        });
    }
    if atoms.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("atom coordinate".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidWeights("weights sum to zero".into()));
    }
    Ok(total)
}

pub(crate) fn cmp_points(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// A probability density sampled on the 1-d lattice `origin + i·spacing`.
/// `values` are densities (mass per unit length), normalized so that
/// `spacing · Σ values = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    origin: f64,
    spacing: f64,
    values: Vec<f64>,
}

impl GridDensity {
    /// Normalizes `values` to unit mass.
    pub fn new(origin: f64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() || !origin.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid origin {origin} / spacing {spacing}"
            )));
        }
        if values.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidWeights("grid values must be finite and nonnegative".into()));
        }
        let mass = spacing * values.iter().sum::<f64>();
        if mass <= 0.0 {
            return Err(Error::InvalidWeights("grid carries no mass".into()));
        }
        let values = values.into_iter().map(|v| v / mass).collect();
        Ok(Self {
            origin,
            spacing,
            values,
        })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            origin: self.origin,
            spacing: self.spacing,
            count: self.values.len(),
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.node(i))
    }

    /// Node positions paired with node masses `value · spacing`.
    pub fn masses(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.node(i), v * self.spacing))
    }

    pub fn mass(&self) -> f64 {
        self.spacing * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        numeric::weighted_moments(self.masses()).0
    }

    pub fn variance(&self) -> f64 {
        numeric::weighted_moments(self.masses()).1
    }

    pub fn same_lattice(&self, other: &GridDensity) -> bool {
        self.values.len() == other.values.len()
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
            && (self.origin - other.origin).abs() <= 1e-9 * self.spacing
    }

    /// The grid viewed as atoms at its nodes (zero-mass nodes dropped).
    pub fn to_discrete(&self) -> DiscreteMeasure {
        let (atoms, weights): (Vec<f64>, Vec<f64>) = self.masses().filter(|(_, m)| *m > 0.0).unzip();
        // unwrap: a normalized grid has positive mass.
        DiscreteMeasure::from_unnormalized(1, atoms, weights).unwrap()
    }
}

/// Gaussian law with diagonal covariance. Zero variance entries are allowed
/// and make the measure a point mass along that axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMeasure {
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl GaussianMeasure {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::InvalidParameter("gaussian needs at least one dimension".into()));
        }
        if mean.len() != variance.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: variance.len(),
            });
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("gaussian mean".into()));
        }
        if variance.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter("gaussian variance must be finite and ≥ 0".into()));
        }
        Ok(Self { mean, variance })
    }

    pub fn scalar(mean: f64, variance: f64) -> Result<Self> {
        Self::new(vec![mean], vec![variance])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    pub fn is_point_mass(&self) -> bool {
        self.variance.iter().all(|v| *v == 0.0)
    }

    pub fn pdf1(&self, x: f64) -> f64 {
        let s = self.variance[0].sqrt();
        numeric::normal_pdf((x - self.mean[0]) / s) / s
    }
}

/// Any of the supported measure carriers.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Discrete(DiscreteMeasure),
    Grid(GridDensity),
    Gaussian(GaussianMeasure),
}

impl Measure {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Ok(Measure::Gaussian(GaussianMeasure::scalar(mean, variance)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Discrete(d) => d.dim(),
            Measure::Grid(_) => 1,
            Measure::Gaussian(g) => g.dim(),
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        match self {
            Measure::Discrete(d) => d.mean(),
            Measure::Grid(g) => vec![g.mean()],
            Measure::Gaussian(g) => g.mean().to_vec(),
        }
    }

    pub fn variance(&self) -> Vec<f64> {
        match self {
            Measure::Discrete(d) => d.variance(),
            Measure::Grid(g) => vec![g.variance()],
            Measure::Gaussian(g) => g.variance().to_vec(),
        }
    }

    /// Draws a point by inverse transform from `dim()` uniforms in `[0, 1)`.
    ///
    /// Every carrier consumes exactly one uniform per coordinate, so twin
    /// samplers fed the same uniform stream stay synchronized.
    pub fn quantile_sample(&self, u: &[f64]) -> Vec<f64> {
        let clamp = |p: f64| p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        match self {
            Measure::Gaussian(g) => g
                .mean()
                .iter()
                .zip(g.variance())
                .zip(u)
                .map(|((m, v), p)| m + v.sqrt() * numeric::normal_quantile(clamp(*p)))
                .collect(),
            Measure::Discrete(d) => {
                let i = inverse_cdf_index(d.weights().iter().copied(), u[0]);
                d.atom(i).to_vec()
            }
            Measure::Grid(g) => {
                let h = g.spacing();
                let i = inverse_cdf_index(g.values().iter().map(|v| v * h), u[0]);
                vec![g.node(i)]
            }
        }
    }
}

pub(crate) fn inverse_cdf_index(weights: impl Iterator<Item = f64>, u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last
}

impl From<DiscreteMeasure> for Measure {
    fn from(m: DiscreteMeasure) -> Self {
        Measure::Discrete(m)
    }
}

impl From<GridDensity> for Measure {
    fn from(m: GridDensity) -> Self {
        Measure::Grid(m)
    }
}

impl From<GaussianMeasure> for Measure {
    fn from(m: GaussianMeasure) -> Self {
        Measure::Gaussian(m)
    }
}

type DensityEval = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A probability density on ℝ^d with a declared support radius: the density
/// is treated as zero outside the box `[-radius, radius]^d`.
#[derive(Clone)]
pub struct DensityFn {
    name: String,
    dim: usize,
    radius: f64,
    eval: Arc<DensityEval>,
}

impl fmt::Debug for DensityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityFn")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("radius", &self.radius)
            .finish()
    }
}

/// Integral over the declared support must be 1 within this.
const DENSITY_NORM_TOL: f64 = 1e-6;

impl DensityFn {
    /// Wraps an evaluation rule, checking numerically that it integrates to
    /// one over `[-radius, radius]^dim`.
    pub fn new<F>(name: impl Into<String>, dim: usize, radius: f64, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidParameter(format!(
                "density dimension {dim} outside 1..=3"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("support radius {radius}")));
        }
        let density = Self {
            name: name.into(),
            dim,
            radius,
            eval: Arc::new(eval),
        };
        let integral = density.mass_within(radius);
        if (integral - 1.0).abs() > DENSITY_NORM_TOL {
            return Err(Error::DensityNotNormalized { integral });
        }
        Ok(density)
    }

    /// Centered normal density with standard deviation `std` in 1-d.
    pub fn gaussian(std: f64) -> Result<Self> {
        Self::gaussian_iso(1, std)
    }

    /// Isotropic centered normal density in `dim` dimensions.
    pub fn gaussian_iso(dim: usize, std: f64) -> Result<Self> {
        if !(std > 0.0) {
            return Err(Error::InvalidParameter(format!("gaussian std {std}")));
        }
        // Per-axis radius so that the box keeps 1 - 1e-10 of the mass.
        let tail = 1e-10 / (2.0 * dim.max(1) as f64);
        let radius = numeric::normal_quantile(1.0 - tail) * std;
        let norm = (2.0 * std::f64::consts::PI * std * std).powf(dim as f64 / 2.0);
        Self::new(format!("normal(0, {std}²)"), dim, radius, move |z| {
            let r2: f64 = z.iter().map(|x| x * x).sum();
            (-0.5 * r2 / (std * std)).exp() / norm
        })
    }

    /// Uniform density on `[-half_width, half_width]`.
    pub fn uniform(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParameter(format!("uniform half-width {half_width}")));
        }
        Self::new(format!("uniform(±{half_width})"), 1, half_width, move |z| {
            if z[0].abs() <= half_width {
                0.5 / half_width
            } else {
                0.0
            }
        })
    }

    /// Triangular density on `[-half_width, half_width]` peaked at 0.
    pub fn triangular(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParameter(format!("triangular half-width {half_width}")));
        }
        Self::new(format!("triangular(±{half_width})"), 1, half_width, move |z| {
            ((1.0 - z[0].abs() / half_width) / half_width).max(0.0)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Density at `z`; zero outside the declared support box.
    pub fn eval(&self, z: &[f64]) -> f64 {
        if z.iter().any(|x| x.abs() > self.radius) {
            return 0.0;
        }
        (self.eval)(z)
    }

    pub fn eval1(&self, z: f64) -> f64 {
        self.eval(&[z])
    }

    /// Mass inside `[-r, r]^dim` by quadrature.
    pub fn mass_within(&self, r: f64) -> f64 {
        let r = r.min(self.radius);
        if self.dim == 1 {
            numeric::simpson(|x| (self.eval)(&[x]), -r, r, 20_000)
        } else {
            let lo = vec![-r; self.dim];
            let hi = vec![r; self.dim];
            numeric::midpoint_box(|z| (self.eval)(z), &lo, &hi, numeric::nodes_per_dim(self.dim))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalization_merges_and_drops() {
        let m = DiscreteMeasure::on_line(&[1.0, 0.0, 1.0, 2.0], &[0.25, 0.25, 0.5, 0.0]).unwrap();
        assert_eq!(m.atoms(), &[0.0, 1.0]);
        assert_eq!(m.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(DiscreteMeasure::on_line(&[0.0, 1.0], &[0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::on_line(&[0.0], &[-1.0]).is_err());
        assert!(matches!(
            DiscreteMeasure::on_line(&[], &[]),
            Err(Error::EmptyMeasure)
        ));
        assert!(DiscreteMeasure::new(2, vec![0.0, 1.0, 2.0], vec![1.0]).is_err());
    }

    #[test]
    fn grid_normalizes() {
        let g = GridDensity::new(0.0, 0.5, vec![1.0, 1.0, 2.0]).unwrap();
        assert!((g.mass() - 1.0).abs() < 1e-12);
        assert!(GridDensity::new(0.0, -1.0, vec![1.0]).is_err());
        assert!(GridDensity::new(0.0, 1.0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn standard_densities_are_normalized() {
        for d in [
            DensityFn::gaussian(1.0).unwrap(),
            DensityFn::gaussian(5.0).unwrap(),
            DensityFn::uniform(1.0).unwrap(),
            DensityFn::triangular(2.0).unwrap(),
            DensityFn::gaussian_iso(2, 1.0).unwrap(),
        ] {
            assert!((d.mass_within(d.radius()) - 1.0).abs() < 1e-6, "{}", d.name());
        }
    }

    #[test]
    fn unnormalized_density_is_rejected() {
        let r = DensityFn::new("twice", 1, 1.0, |_| 1.0);
        assert!(matches!(r, Err(Error::DensityNotNormalized { .. })));
    }

    #[test]
    fn quantile_sample_consumes_one_uniform_per_axis() {
        let g = Measure::gaussian(1.0, 4.0).unwrap();
        assert!((g.quantile_sample(&[0.5])[0] - 1.0).abs() < 1e-12);
        let d = Measure::Discrete(DiscreteMeasure::on_line(&[0.0, 1.0], &[0.25, 0.75]).unwrap());
        assert_eq!(d.quantile_sample(&[0.2]), vec![0.0]);
        assert_eq!(d.quantile_sample(&[0.3]), vec![1.0]);
    }
}
