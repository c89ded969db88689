//! Total-variation continuity of autoregressive kernels.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kernel::{random_point, random_unit, ArKernel, DEFAULT_PROBE_BOX};
use crate::error::{Error, Result};
use crate::numeric;

/// Both densities must keep this much mass on the quadrature box.
const QUADRATURE_MASS: f64 = 1.0 - 1e-4;

/// `‖P(x, ·) − P(x′, ·)‖_TV` through the change of variables `z ↦ σ(x′)z + b(x′)`:
///
/// ```text
/// ∫ | q_η(σ(x)⁻¹{σ(x′)z − b(x) + b(x′)}) · |det σ(x)⁻¹σ(x′)| − q_η(z) | dz
/// ```
///
/// integrated by the midpoint rule on a box covering both terms' supports
/// (in 1-d, piecewise between the support edges).
pub fn ar_kernel_tv(kernel: &ArKernel, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    let m = kernel.dim();
    if x.len() != m || x_prime.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: if x.len() != m { x.len() } else { x_prime.len() },
        });
    }
    if x == x_prime {
        return Ok(0.0);
    }
    let q = kernel.noise().density();
    let r = q.radius();

    let sx = kernel.dispersion(x);
    let sxp = kernel.dispersion(x_prime);
    let shift = DVector::from_vec(kernel.drift(x_prime)) - DVector::from_vec(kernel.drift(x));
    let sx_inv = sx
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("σ(x) is singular".into()))?;
    let sxp_inv = sxp
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("σ(x′) is singular".into()))?;
    // g(z) = q(A z + c)·|det A| with A = σ(x)⁻¹σ(x′), c = σ(x)⁻¹(b(x′) − b(x)).
    let a = &sx_inv * &sxp;
    let c = &sx_inv * &shift;
    let jac = a.determinant().abs();

    // g lives on A⁻¹([-r, r]^m − c); take its bounding box and join with q's.
    let a_inv = &sxp_inv * &sx;
    let center = -(&a_inv * &c);
    let mut lo = vec![-r; m];
    let mut hi = vec![r; m];
    for i in 0..m {
        let extent: f64 = (0..m).map(|k| a_inv[(i, k)].abs()).sum::<f64>() * r;
        lo[i] = lo[i].min(center[i] - extent);
        hi[i] = hi[i].max(center[i] + extent);
    }

    // The box holds both supports, so the only mass lost is q's own truncation.
    let captured = q.mass_within(r);
    if captured < QUADRATURE_MASS {
        return Err(Error::InsufficientMass {
            captured,
            required: QUADRATURE_MASS,
        });
    }

    let tv = if m == 1 {
        // Split at the support edges of both densities so that jumps (uniform
        // noise) fall on panel boundaries.
        let (a, c) = (a[(0, 0)], c[0]);
        let g_edges = [(-r - c) / a, (r - c) / a];
        let mut cuts = vec![lo[0], hi[0], -r, r, g_edges[0], g_edges[1]];
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|u, v| (*u - *v).abs() < 1e-14);
        let total = hi[0] - lo[0];
        let budget = numeric::nodes_per_dim(1) as f64;
        cuts.windows(2)
            .map(|w| {
                let n = ((w[1] - w[0]) / total * budget).ceil().max(8.0) as usize;
                numeric::midpoint_box(|z| (q.eval1(a * z[0] + c) * jac - q.eval(z)).abs(), &w[..1], &w[1..], n)
            })
            .sum::<f64>()
    } else {
        let mut u = vec![0.0; m];
        numeric::midpoint_box(
            |z| {
                for i in 0..m {
                    u[i] = c[i] + (0..m).map(|k| a[(i, k)] * z[k]).sum::<f64>();
                }
                (q.eval(&u) * jac - q.eval(z)).abs()
            },
            &lo,
            &hi,
            numeric::nodes_per_dim(m),
        )
    };
    Ok(tv.clamp(0.0, 2.0))
}

/// Empirical modulus `ϖ̂_P(δ)` of TV-continuity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusCurve {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub probes: usize,
    /// Probe states were drawn from `[-probe_box, probe_box]^m`.
    pub probe_box: f64,
}

impl ModulusCurve {
    pub fn at(&self, delta: f64) -> Option<f64> {
        self.deltas
            .iter()
            .position(|d| *d == delta)
            .map(|i| self.values[i])
    }
}

/// `ϖ̂_P(δ) = max` of [`ar_kernel_tv`] over `probes` random pairs at
/// distance exactly `δ`. The same base points and directions are reused for
/// every `δ`, so curves for different deltas are comparable. This is an
/// empirical lower estimate of `sup_{d(x,y) ≤ δ} ‖P(x,·) − P(y,·)‖_TV`.
pub fn kernel_tv_modulus(kernel: &ArKernel, deltas: &[f64], probes: usize, seed: u64) -> Result<ModulusCurve> {
    kernel_tv_modulus_in(kernel, deltas, probes, seed, DEFAULT_PROBE_BOX)
}

pub fn kernel_tv_modulus_in(
    kernel: &ArKernel,
    deltas: &[f64],
    probes: usize,
    seed: u64,
    probe_box: f64,
) -> Result<ModulusCurve> {
    if probes == 0 {
        return Err(Error::InvalidParameter("probes must be at least 1".into()));
    }
    if deltas.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return Err(Error::InvalidParameter("deltas must be finite and nonnegative".into()));
    }
    if deltas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("deltas must be sorted ascending".into()));
    }
    let m = kernel.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..probes)
        .map(|_| (random_point(&mut rng, m, probe_box), random_unit(&mut rng, m)))
        .collect();
    let mut values = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut worst: f64 = 0.0;
        for (x, v) in &pairs {
            let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + delta * b).collect();
            worst = worst.max(ar_kernel_tv(kernel, x, &y)?);
        }
        values.push(worst);
    }
    Ok(ModulusCurve {
        deltas: deltas.to_vec(),
        values,
        probes,
        probe_box,
    })
}
