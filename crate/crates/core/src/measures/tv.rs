//! Total variation distance `∫|da − db|` (range `[0, 2]`).

use std::cmp::Ordering;

use super::{cmp_points, grid, DiscreteMeasure, GaussianMeasure, GridDensity, Measure};
use crate::error::{Error, Result};
use crate::numeric::normal_cdf;

/// Total variation distance in the sup-norm convention (`[0, 2]`).
///
/// Exact for discrete pairs and Gaussian pairs (closed form). Grid pairs
/// must share a lattice and use a Riemann sum. A Gaussian compared with a
/// grid is first discretized onto the grid's lattice. Atomic measures are
/// singular with respect to densities, so such pairs are at distance 2.
pub fn tv_distance(a: &Measure, b: &Measure) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let v = match (a, b) {
        (Measure::Discrete(x), Measure::Discrete(y)) => tv_discrete(x, y),
        (Measure::Grid(x), Measure::Grid(y)) => tv_grid(x, y)?,
        (Measure::Gaussian(x), Measure::Gaussian(y)) => tv_gaussian(x, y)?,
        (Measure::Gaussian(g), Measure::Grid(d)) | (Measure::Grid(d), Measure::Gaussian(g)) => {
            if g.is_point_mass() {
                2.0
            } else {
                let spec = d.spec();
                let gd = grid::discretize(&Measure::Gaussian(g.clone()), spec.origin, spec.spacing, spec.count)?;
                tv_grid(&gd, d)?
            }
        }
        (Measure::Discrete(x), Measure::Gaussian(g)) | (Measure::Gaussian(g), Measure::Discrete(x)) => {
            if g.is_point_mass() {
                tv_discrete(x, &DiscreteMeasure::dirac(g.mean()))
            } else {
                2.0
            }
        }
        (Measure::Discrete(_), Measure::Grid(_)) | (Measure::Grid(_), Measure::Discrete(_)) => 2.0,
    };
    Ok(v.clamp(0.0, 2.0))
}

/// `Σ |a_i − b_i|` over the union of atoms (both canonical, hence sorted).
pub(crate) fn tv_discrete(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < a.len() || j < b.len() {
        let ord = if i == a.len() {
            Ordering::Greater
        } else if j == b.len() {
            Ordering::Less
        } else {
            cmp_points(a.atom(i), b.atom(j))
        };
        match ord {
            Ordering::Less => {
                acc += a.weights()[i];
                i += 1;
            }
            Ordering::Greater => {
                acc += b.weights()[j];
                j += 1;
            }
            Ordering::Equal => {
                acc += (a.weights()[i] - b.weights()[j]).abs();
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

pub(crate) fn tv_grid(a: &GridDensity, b: &GridDensity) -> Result<f64> {
    if !a.same_lattice(b) {
        return Err(Error::GridMismatch {
            a_origin: a.origin(),
            b_origin: b.origin(),
            a_spacing: a.spacing(),
            b_spacing: b.spacing(),
            a_count: a.len(),
            b_count: b.len(),
        });
    }
    Ok(a.spacing()
        * a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>())
}

fn tv_gaussian(a: &GaussianMeasure, b: &GaussianMeasure) -> Result<f64> {
    if a.is_point_mass() || b.is_point_mass() {
        if a.is_point_mass() && b.is_point_mass() {
            return Ok(tv_discrete(&DiscreteMeasure::dirac(a.mean()), &DiscreteMeasure::dirac(b.mean())));
        }
        return Ok(2.0);
    }
    if a.dim() == 1 {
        return Ok(tv_gaussian_1d(a.mean()[0], a.variance()[0], b.mean()[0], b.variance()[0]));
    }
    if a.variance() == b.variance() {
        if a.variance().contains(&0.0) {
            return Err(Error::Unsupported(
                "TV between degenerate multivariate gaussians".into(),
            ));
        }
        let mahal = a
            .mean()
            .iter()
            .zip(b.mean())
            .zip(a.variance())
            .map(|((x, y), v)| (x - y) * (x - y) / v)
            .sum::<f64>()
            .sqrt();
        return Ok(2.0 * (2.0 * normal_cdf(mahal / 2.0) - 1.0));
    }
    Err(Error::Unsupported(
        "TV between multivariate gaussians with different covariances".into(),
    ))
}

/// Closed-form `∫|N(m1, v1) − N(m2, v2)|` for nondegenerate 1-d normals.
pub fn tv_gaussian_1d(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    let (s1, s2) = (v1.sqrt(), v2.sqrt());
    if (v1 - v2).abs() <= 1e-14 * v1.max(v2) {
        let s = 0.5 * (s1 + s2);
        return 2.0 * (2.0 * normal_cdf((m1 - m2).abs() / (2.0 * s)) - 1.0);
    }
    // Make (m1, v1) the narrower law; it dominates between the two crossings.
    let (m1, s1, m2, s2) = if v1 < v2 { (m1, s1, m2, s2) } else { (m2, s2, m1, s1) };
    let (v1, v2) = (s1 * s1, s2 * s2);
    let qa = 1.0 / v2 - 1.0 / v1;
    let qb = 2.0 * (m1 / v1 - m2 / v2);
    let qc = m2 * m2 / v2 - m1 * m1 / v1 + 2.0 * (s2 / s1).ln();
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let q = -0.5 * (qb + qb.signum() * disc);
    let (mut r1, mut r2) = if q != 0.0 { (q / qa, qc / q) } else { (-disc / (2.0 * qa), disc / (2.0 * qa)) };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    let p1 = normal_cdf((r2 - m1) / s1) - normal_cdf((r1 - m1) / s1);
    let p2 = normal_cdf((r2 - m2) / s2) - normal_cdf((r1 - m2) / s2);
    (2.0 * (p1 - p2)).clamp(0.0, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::normal_pdf;

    #[test]
    fn identity_and_disjoint() {
        let a = Measure::Discrete(DiscreteMeasure::on_line(&[0.0, 1.0], &[0.3, 0.7]).unwrap());
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        let d0 = Measure::Discrete(DiscreteMeasure::dirac1(0.0));
        let d1 = Measure::Discrete(DiscreteMeasure::dirac1(1.0));
        assert_eq!(tv_distance(&d0, &d1).unwrap(), 2.0);
    }

    #[test]
    fn unit_shift_gaussians() {
        // Riemann-sum oracle on a fine grid.
        let h = 1e-4;
        let oracle: f64 = (0..200_000)
            .map(|i| {
                let z = -10.0 + (i as f64 + 0.5) * h;
                (normal_pdf(z) - normal_pdf(z - 1.0)).abs() * h
            })
            .sum();
        let closed = 2.0 * (2.0 * normal_cdf(0.5) - 1.0);
        assert!((oracle - closed).abs() < 1e-8);
        let a = Measure::gaussian(0.0, 1.0).unwrap();
        let b = Measure::gaussian(1.0, 1.0).unwrap();
        let v = tv_distance(&a, &b).unwrap();
        assert!((v - 0.76585).abs() < 1e-5);
        assert!((v - closed).abs() < 1e-12);
    }

    #[test]
    fn unequal_variance_matches_quadrature() {
        for &(m1, v1, m2, v2) in &[(0.0, 1.0, 0.0, 4.0), (0.3, 0.5, -1.0, 2.0), (2.0, 3.0, 1.0, 0.2)] {
            let h = 1e-4;
            let (s1, s2) = (f64::sqrt(v1), f64::sqrt(v2));
            let oracle: f64 = (0..400_000)
                .map(|i| {
                    let z = -20.0 + (i as f64 + 0.5) * h;
                    (normal_pdf((z - m1) / s1) / s1 - normal_pdf((z - m2) / s2) / s2).abs() * h
                })
                .sum();
            let v = tv_gaussian_1d(m1, v1, m2, v2);
            assert!((v - oracle).abs() < 1e-7, "{v} vs {oracle}");
            assert!((v - tv_gaussian_1d(m2, v2, m1, v1)).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_errors() {
        let a = Measure::Grid(GridDensity::new(0.0, 1.0, vec![1.0, 1.0]).unwrap());
        let b = Measure::Grid(GridDensity::new(0.5, 1.0, vec![1.0, 1.0]).unwrap());
        assert!(matches!(tv_distance(&a, &b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn dimension_mismatch_errors() {
        let a = Measure::Discrete(DiscreteMeasure::dirac(&[0.0, 0.0]));
        let b = Measure::Discrete(DiscreteMeasure::dirac1(0.0));
        assert!(matches!(tv_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn atoms_versus_densities_are_singular() {
        let a = Measure::Discrete(DiscreteMeasure::dirac1(0.0));
        let b = Measure::gaussian(0.0, 1.0).unwrap();
        assert_eq!(tv_distance(&a, &b).unwrap(), 2.0);
        let pm = Measure::gaussian(0.0, 0.0).unwrap();
        assert_eq!(tv_distance(&a, &pm).unwrap(), 0.0);
    }
}
