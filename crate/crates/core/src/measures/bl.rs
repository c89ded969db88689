//! Dual bounded-Lipschitz distance.
//!
//! For discrete measures the supremum over `Lip = {f : |f| ≤ 1, ‖f‖_L ≤ 1}`
//! only depends on the values `f_i` at the union of atoms, so it is the
//! linear program
//!
//! ```text
//! maximize   Σ w_i f_i
//! subject to |f_i| ≤ 1,  |f_i − f_j| ≤ d(x_i, x_j)
//! ```
//!
//! with `w = a − b`. Any feasible vector extends to a member of `Lip` on the
//! whole space, so the LP value is the exact supremum.
//!
//! On the line the adjacent-pair constraints imply all others. The fast
//! path solves that chain LP by dynamic programming: the value function
//! `V_k(g) = max Σ_{i≤k} w_i f_i` given `f_k = g` is concave and piecewise
//! linear on `[-1, 1]`, and each step is a window-max (dilation by the gap to
//! the next atom) followed by adding a linear term. The function is kept as
//! a multiset of slopes, so the whole pass costs `O(n log n)`.

use std::collections::BTreeMap;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use ordered_float::OrderedFloat;

use super::{grid, DiscreteMeasure, GaussianMeasure, GridDensity, Measure};
use crate::error::{Error, Result};
use crate::numeric::euclidean;

/// `‖a − b‖_BL` for discrete measures. Uses the line fast path when `d = 1`
/// and the dense LP otherwise.
pub fn bl_distance(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    let (points, weights) = signed_union(a, b)?;
    Ok(bl_signed_sup(a.dim(), &points, &weights)?.clamp(0.0, 2.0))
}

/// `‖a − b‖_BL` through the dense all-pairs LP regardless of dimension.
pub fn bl_distance_lp(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    let (points, weights) = signed_union(a, b)?;
    Ok(lp_sup(a.dim(), &points, &weights)?.clamp(0.0, 2.0))
}

/// `sup_{f ∈ Lip} Σ_i w_i f(x_i)` for arbitrary signed weights on points
/// stored flat (`dim` coordinates each). Duplicate points are merged.
pub fn bl_signed_sup(dim: usize, points: &[f64], weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    if dim == 0 || points.len() != dim * weights.len() {
        return Err(Error::DimensionMismatch {
            expected: dim * weights.len(),
            found: points.len(),
        });
    }
    if dim == 1 {
        let mut pairs: Vec<(f64, f64)> = points.iter().copied().zip(weights.iter().copied()).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut xs: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut ws: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            if xs.last() == Some(&x) {
                *ws.last_mut().unwrap() += w;
            } else {
                xs.push(x);
                ws.push(w);
            }
        }
        Ok(line_sup(&xs, &ws))
    } else {
        lp_sup(dim, points, weights)
    }
}

/// BL distance between arbitrary carriers in 1-d. Densities are reduced to
/// atoms: grids at their nodes, Gaussians on a lattice of spacing `s/32`
/// spanning `±12 s` (point-mass Gaussians become atoms). Multivariate
/// pairs must both be discrete.
pub fn bl_between(a: &Measure, b: &Measure) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if let (Measure::Discrete(x), Measure::Discrete(y)) = (a, b) {
        return bl_distance(x, y);
    }
    if a.dim() != 1 {
        return Err(Error::Unsupported(
            "BL between multivariate densities; sample or discretize first".into(),
        ));
    }
    let x = atoms_for_bl(a, b)?;
    let y = atoms_for_bl(b, a)?;
    bl_distance(&x, &y)
}

fn atoms_for_bl(m: &Measure, other: &Measure) -> Result<DiscreteMeasure> {
    Ok(match m {
        Measure::Discrete(d) => d.clone(),
        Measure::Grid(g) => g.to_discrete(),
        Measure::Gaussian(g) => gaussian_atoms(g, other)?,
    })
}

fn gaussian_atoms(g: &GaussianMeasure, other: &Measure) -> Result<DiscreteMeasure> {
    if g.is_point_mass() {
        return Ok(DiscreteMeasure::dirac(g.mean()));
    }
    let s = g.variance()[0].sqrt();
    // Share the lattice with a Gaussian partner so node effects cancel.
    let (lo, hi, s_min) = match other {
        Measure::Gaussian(o) if !o.is_point_mass() => {
            let so = o.variance()[0].sqrt();
            let (m1, m2) = (g.mean()[0], o.mean()[0]);
            let smax = s.max(so);
            (m1.min(m2) - 12.0 * smax, m1.max(m2) + 12.0 * smax, s.min(so))
        }
        _ => (g.mean()[0] - 12.0 * s, g.mean()[0] + 12.0 * s, s),
    };
    let mut spacing = s_min / 32.0;
    const MAX_NODES: f64 = 400_000.0;
    if (hi - lo) / spacing > MAX_NODES {
        spacing = (hi - lo) / MAX_NODES;
    }
    let count = ((hi - lo) / spacing).ceil() as usize + 1;
    let grid: GridDensity = grid::discretize(&Measure::Gaussian(g.clone()), lo, spacing, count)?;
    Ok(grid.to_discrete())
}

fn signed_union(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut points = Vec::with_capacity(a.atoms().len() + b.atoms().len());
    let mut weights = Vec::with_capacity(a.len() + b.len());
    for (x, w) in a.iter() {
        points.extend_from_slice(x);
        weights.push(w);
    }
    for (x, w) in b.iter() {
        points.extend_from_slice(x);
        weights.push(-w);
    }
    Ok((points, weights))
}

/// Chain LP on sorted, distinct points; see the module docs.
fn line_sup(points: &[f64], weights: &[f64]) -> f64 {
    type Key = OrderedFloat<f64>;
    // Slopes stored as `actual − offset` so adding `w·g` is O(1).
    let mut slopes: BTreeMap<Key, f64> = BTreeMap::new();
    let mut offset = 0.0;
    slopes.insert(OrderedFloat(weights[0]), 2.0);
    // Value of the current function at g = −1.
    let mut left = -weights[0];

    for i in 1..points.len() {
        let gap = points[i] - points[i - 1];

        // Increasing part moves left by `gap`: cut it from the left end.
        let mut rem = gap;
        while rem > 0.0 {
            let Some((&k, &len)) = slopes.last_key_value() else { break };
            let slope = k.0 + offset;
            if slope <= 0.0 {
                break;
            }
            if len <= rem {
                left += slope * len;
                rem -= len;
                slopes.pop_last();
            } else {
                left += slope * rem;
                slopes.insert(k, len - rem);
                rem = 0.0;
            }
        }
        let cut_left = gap - rem;

        // Decreasing part moves right by `gap`: cut it from the right end.
        let mut rem = gap;
        while rem > 0.0 {
            let Some((&k, &len)) = slopes.first_key_value() else { break };
            if k.0 + offset >= 0.0 {
                break;
            }
            if len <= rem {
                rem -= len;
                slopes.pop_first();
            } else {
                slopes.insert(k, len - rem);
                rem = 0.0;
            }
        }
        let cut_right = gap - rem;

        // The plateau widens by what was cut.
        let flat = cut_left + cut_right;
        if flat > 0.0 {
            *slopes.entry(OrderedFloat(-offset)).or_insert(0.0) += flat;
        }

        offset += weights[i];
        left -= weights[i];
    }

    left + slopes
        .iter()
        .map(|(k, len)| (k.0 + offset).max(0.0) * len)
        .sum::<f64>()
}

fn lp_sup(dim: usize, points: &[f64], weights: &[f64]) -> Result<f64> {
    // Zero-weight atoms do not change the supremum: any feasible vector on the
    // rest extends to them.
    let keep: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] != 0.0).collect();
    if keep.is_empty() {
        return Ok(0.0);
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = keep.iter().map(|&i| problem.add_var(weights[i], (-1.0, 1.0))).collect();
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate().skip(a + 1) {
            let d = euclidean(&points[i * dim..(i + 1) * dim], &points[j * dim..(j + 1) * dim]);
            if d >= 2.0 {
                continue;
            }
            let row = [(vars[a], 1.0), (vars[b], -1.0)];
            problem.add_constraint(row, ComparisonOp::Le, d);
            problem.add_constraint(row, ComparisonOp::Ge, -d);
        }
    }
    let solution = problem
        .solve()
        .map_err(|e| Error::LinearProgram(e.to_string()))?;
    Ok(solution.objective())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_measures() {
        let a = DiscreteMeasure::on_line(&[0.0, 0.4, 3.0], &[0.2, 0.5, 0.3]).unwrap();
        assert!(bl_distance(&a, &a).unwrap().abs() < 1e-15);
    }

    #[test]
    fn dirac_pair_is_clipped_distance() {
        for t in [0.1, 0.5, 1.0, 2.0, 3.0, 5.0] {
            let a = DiscreteMeasure::dirac1(0.0);
            let b = DiscreteMeasure::dirac1(t);
            let expected = f64::min(2.0, t);
            assert!((bl_distance(&a, &b).unwrap() - expected).abs() < 1e-12, "t = {t}");
            assert!((bl_distance_lp(&a, &b).unwrap() - expected).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn three_atom_example() {
        // f = (1, 0, −1) is optimal: value 0.5·1 − 0.5·(−1) = 1.
        let a = DiscreteMeasure::on_line(&[0.0, 1.0, 2.0], &[0.5, 0.5, 0.0]).unwrap();
        let b = DiscreteMeasure::on_line(&[0.0, 1.0, 2.0], &[0.0, 0.5, 0.5]).unwrap();
        assert!((bl_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((bl_distance_lp(&a, &b).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn three_atom_example_lattice_brute_force() {
        let w = [0.5, 0.0, -0.5];
        let x: [f64; 3] = [0.0, 1.0, 2.0];
        let steps = 200usize;
        let grid: Vec<f64> = (0..=steps).map(|k| -1.0_f64 + 2.0 * k as f64 / steps as f64).collect();
        let mut best = f64::NEG_INFINITY;
        for &f0 in &grid {
            for &f1 in &grid {
                if (f0 - f1).abs() > (x[0] - x[1]).abs() + 1e-12 {
                    continue;
                }
                for &f2 in &grid {
                    if (f1 - f2).abs() > 1.0 + 1e-12 || (f0 - f2).abs() > 2.0 + 1e-12 {
                        continue;
                    }
                    best = best.max(w[0] * f0 + w[1] * f1 + w[2] * f2);
                }
            }
        }
        let a = DiscreteMeasure::on_line(&x, &[0.5, 0.5, 0.0]).unwrap();
        let b = DiscreteMeasure::on_line(&x, &[0.0, 0.5, 0.5]).unwrap();
        assert!((bl_distance(&a, &b).unwrap() - best).abs() < 1e-12);
    }

    #[test]
    fn signed_sup_of_positive_mass_is_total() {
        // With all weights positive the best f is ≡ 1.
        let v = bl_signed_sup(1, &[0.0, 0.3, 5.0], &[0.2, 0.3, 0.1]).unwrap();
        assert!((v - 0.6).abs() < 1e-12);
    }

    #[test]
    fn planar_dirac_pair() {
        let a = DiscreteMeasure::dirac(&[0.0, 0.0]);
        let b = DiscreteMeasure::dirac(&[0.3, 0.4]);
        assert!((bl_distance(&a, &b).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let a = DiscreteMeasure::dirac(&[0.0, 0.0]);
        let b = DiscreteMeasure::dirac1(0.0);
        assert!(matches!(bl_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(bl_signed_sup(1, &[], &[]), Err(Error::EmptyMeasure)));
    }

    #[test]
    fn gaussian_pair_close_to_shift() {
        // Narrow equal-variance pair: BL ≈ mean shift.
        let a = Measure::gaussian(0.0, 1e-4).unwrap();
        let b = Measure::gaussian(0.01, 1e-4).unwrap();
        let v = bl_between(&a, &b).unwrap();
        assert!((v - 0.01).abs() < 1e-9, "{v}");
    }
}
