use serde::Serialize;

use super::StabilityTrace;
use crate::error::{Error, Result};
use crate::models::StaticGaussianModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateClass {
    Polynomial,
    Exponential,
    NonDecaying,
}

impl RateClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RateClass::Polynomial => "polynomial",
            RateClass::Exponential => "exponential",
            RateClass::NonDecaying => "non-decaying",
        }
    }
}

/// Least-squares fits of a distance trace on a window of steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    /// Slope of `log d_n` against `log n`.
    pub slope: f64,
    pub r2: f64,
    /// Slope of `log d_n` against `n`.
    pub linear_slope: f64,
    pub linear_r2: f64,
    pub classification: RateClass,
    /// Inclusive step range that was fitted.
    pub window: (usize, usize),
    /// Points used, after dropping nonpositive and non-finite values.
    pub used: usize,
    pub excluded: usize,
}

/// Fits `log d_n` against `log n` (power law) and against `n` (geometric)
/// over steps `window.0 ..= window.1`, then classifies:
///
/// - exponential: the geometric fit has `r² ≥ 0.98`, beats the power-law `r²`
///   by at least 0.02, and slopes downward;
/// - non-decaying: the power-law slope is above `−0.1`;
/// - polynomial: everything else.
///
/// Step 0 and entries that are zero, negative or NaN are skipped. At least
/// five points must remain.
///
/// ```
/// use filterlab::stability::{estimate_rate, RateClass};
///
/// let d: Vec<f64> = (0..200).map(|n| 3.0 / (n as f64 + 1.0)).collect();
/// let fit = estimate_rate(&d, (20, 199)).unwrap();
/// assert_eq!(fit.classification, RateClass::Polynomial);
/// assert!((fit.slope + 1.0).abs() < 0.05);
/// ```
pub fn estimate_rate(values: &[f64], window: (usize, usize)) -> Result<RateFit> {
    let (lo, hi) = window;
    if lo > hi || hi >= values.len() {
        return Err(Error::InvalidParameter(format!(
            "window {lo}..={hi} outside a trace of length {}",
            values.len()
        )));
    }
    let mut logn = Vec::new();
    let mut n_lin = Vec::new();
    let mut logd = Vec::new();
    for (n, &d) in values.iter().enumerate().take(hi + 1).skip(lo) {
        if n == 0 || !(d > 0.0) || !d.is_finite() {
            continue;
        }
        logn.push((n as f64).ln());
        n_lin.push(n as f64);
        logd.push(d.ln());
    }
    let used = logd.len();
    if used < 5 {
        return Err(Error::TooFewPoints { usable: used });
    }
    let (slope, r2) = least_squares(&logn, &logd);
    let (linear_slope, linear_r2) = least_squares(&n_lin, &logd);
    let classification = if linear_r2 >= 0.98 && linear_r2 >= r2 + 0.02 && linear_slope < 0.0 {
        RateClass::Exponential
    } else if slope > -0.1 {
        RateClass::NonDecaying
    } else {
        RateClass::Polynomial
    };
    Ok(RateFit {
        slope,
        r2,
        linear_slope,
        linear_r2,
        classification,
        window,
        used,
        excluded: hi + 1 - lo - used,
    })
}

/// Default fitting window: the last 90% of the trace, skipping step 0.
pub fn tail_window(len: usize) -> (usize, usize) {
    ((len / 10).max(1), len.saturating_sub(1))
}

/// Slope and `r²` of `y` on `x`. A constant `y` is fitted perfectly.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if syy <= 1e-30 * n { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiminfEstimate {
    /// `min_n n·cos_lower_n` over the tail window.
    pub estimate: f64,
    /// `|β − α| / σ² · |sin x₀|`.
    pub target: f64,
    pub window: (usize, usize),
}

impl LiminfEstimate {
    /// `|estimate − target| / target`, or the absolute gap for a zero target.
    pub fn relative_error(&self) -> f64 {
        let gap = (self.estimate - self.target).abs();
        if self.target > 0.0 {
            gap / self.target
        } else {
            gap
        }
    }
}

/// `min n·cos_lower_n` over the last `tail_fraction` of the trace, next to
/// the constant it should approach.
pub fn liminf_constant(
    trace: &StabilityTrace,
    model: &StaticGaussianModel,
    x0: f64,
    tail_fraction: f64,
) -> Result<LiminfEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("tail fraction {tail_fraction}")));
    }
    let len = trace.rows.len();
    let lo = ((len as f64) * (1.0 - tail_fraction)).floor() as usize;
    let window = (lo, len.saturating_sub(1));
    let estimate = trace.rows[lo.min(len)..]
        .iter()
        .filter_map(|r| r.cos_lower.map(|c| r.step as f64 * c))
        .fold(f64::INFINITY, f64::min);
    if !estimate.is_finite() {
        return Err(Error::InvalidParameter("trace has no cos_lower entries in the tail".into()));
    }
    Ok(LiminfEstimate {
        estimate,
        target: model.target_constant(x0),
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_classes() {
        let power: Vec<f64> = (0..100).map(|n| 2.0 / n.max(1) as f64).collect();
        let fit = estimate_rate(&power, (1, 99)).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.01);
        assert_eq!(fit.classification, RateClass::Polynomial);

        let geo: Vec<f64> = (0..60).map(|n| 0.5f64.powi(n)).collect();
        assert_eq!(estimate_rate(&geo, (1, 59)).unwrap().classification, RateClass::Exponential);

        let flat = vec![0.7; 50];
        let fit = estimate_rate(&flat, (1, 49)).unwrap();
        assert_eq!(fit.classification, RateClass::NonDecaying);
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn zeros_are_excluded() {
        let mut d: Vec<f64> = (0..20).map(|n| 1.0 / (n as f64 + 1.0)).collect();
        d[5] = 0.0;
        let fit = estimate_rate(&d, (1, 19)).unwrap();
        assert_eq!(fit.excluded, 1);
        assert!(matches!(estimate_rate(&[0.0; 10], (1, 9)), Err(Error::TooFewPoints { usable: 0 })));
    }
}
