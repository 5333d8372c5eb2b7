use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Admissibility2dReport, AdmissibilityReport};

const PI2: f64 = PI * PI;

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("separation must be positive, got {nu}")))
    }
}

/// `E(ν) = π²/(6ν²)`, an upper bound on `Σ_{n≥1} 1/(1 + (nν)²)`.
pub fn e_nu(nu: f64) -> Result<f64> {
    check_nu(nu)?;
    Ok(PI2 / (6.0 * nu * nu))
}

/// `E₂(ν) = 3π²/(2ν³)`, the bivariate counterpart summed over rectangular
/// rings with at most `9n` points in ring `n`. That count holds when points
/// are 2ν apart in the max norm; with gaps of only ν a ring can hold up to
/// `16n + 8` (see [`ring_count`]).
pub fn e2_nu(nu: f64) -> Result<f64> {
    check_nu(nu)?;
    Ok(3.0 * PI2 / (2.0 * nu.powi(3)))
}

/// Number of points in the `n`-th max-norm ring `nν ≤ ‖p − center‖_∞ ≤ (n+1)ν`.
pub fn ring_count(support: &[(f64, f64)], center: (f64, f64), nu: f64, n: usize) -> usize {
    let (lo, hi) = (n as f64 * nu, (n + 1) as f64 * nu);
    support
        .iter()
        .filter(|p| {
            let d = (p.0 - center.0).abs().max((p.1 - center.1).abs());
            lo <= d && d <= hi
        })
        .count()
}

/// A-priori coefficient bounds for the univariate certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBounds {
    pub nu: f64,
    /// Upper bound on `‖a‖_∞`.
    pub a_inf_bound: f64,
    /// Upper bound on `‖b‖_∞`.
    pub b_inf_bound: f64,
    /// The `‖b‖_∞` expression without the `3ν²` numerator factor; smaller
    /// than `b_inf_bound` by that factor and not a valid bound in general.
    pub b_inf_bound_printed: f64,
    /// Lower bound on `v_m a_m`.
    pub a_lower: f64,
    /// Squared separations each condition requires `ν²` to exceed.
    pub nu_thresholds: [f64; 3],
    pub applicable: bool,
    /// Index into `nu_thresholds` of the first violated condition.
    pub offending_threshold: Option<usize>,
}

/// Evaluates the univariate bounds at separation `nu` (σ units).
///
/// With `E = π²/(6ν²)`:
/// `‖a‖_∞ ≤ 1/(K(0) − 4C₀E)`,
/// `‖b‖_∞ ≤ 2C₁E / ((|K⁽²⁾(0)| − 2C₂E)(K(0) − 4C₀E))`,
/// `v_m a_m ≥ (1/K(0))(1 − 4C₀E/(K(0) − 4C₀E))`.
/// When a threshold fails the upper bounds are `+∞` and `a_lower` is 0.
pub fn theoretical_bounds(report: &AdmissibilityReport, nu: f64) -> Result<CoefficientBounds> {
    check_nu(nu)?;
    if !report.passed {
        return Err(Error::InvalidArgument("kernel did not pass the admissibility checks".into()));
    }
    let (c0, c1, c2) = (report.c0(), report.c1(), report.c2());
    let k0 = report.k0;
    let k2 = report.k2_0.abs();
    let nu2 = nu * nu;
    let thresholds = [c2 * PI2 / (3.0 * k2), PI2 * (c1 * c1 + c0 * c2) / (3.0 * c0 * k2), 2.0 * PI2 * c0 / (3.0 * k0)];
    // the second condition is non-strict
    let offending = thresholds.iter().enumerate().position(|(i, &th)| if i == 1 { nu2 < th } else { nu2 <= th });
    let mut out = CoefficientBounds {
        nu,
        a_inf_bound: f64::INFINITY,
        b_inf_bound: f64::INFINITY,
        b_inf_bound_printed: f64::INFINITY,
        a_lower: 0.0,
        nu_thresholds: thresholds,
        applicable: offending.is_none(),
        offending_threshold: offending,
    };
    if out.applicable {
        let a_den = 3.0 * k0 * nu2 - 2.0 * PI2 * c0;
        let b_den = (3.0 * k2 * nu2 - PI2 * c2) * a_den;
        out.a_inf_bound = 3.0 * nu2 / a_den;
        out.b_inf_bound = 3.0 * nu2 * PI2 * c1 / b_den;
        out.b_inf_bound_printed = PI2 * c1 / b_den;
        out.a_lower = (1.0 - 2.0 * PI2 * c0 / a_den) / k0;
    }
    Ok(out)
}

/// A-priori coefficient bounds for the bivariate certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBounds2d {
    pub nu: f64,
    pub a_inf_bound: f64,
    pub b_inf_bound: f64,
    pub c_inf_bound: f64,
    pub a_lower: f64,
    /// Values `ν³` must reach for each condition; see [`theoretical_bounds_2d`].
    pub nu3_thresholds: [f64; 7],
    pub applicable: bool,
    pub offending_threshold: Option<usize>,
}

/// Evaluates the bivariate bounds at separation `nu`, with `E₂ = 3π²/(2ν³)`:
/// `‖a‖_∞ ≤ 1/(K₂(0) − 3C₀₀E₂)`,
/// `‖b‖_∞ ≤ 2C₁₀E₂ / ((|K₂⁽²,⁰⁾(0)| − 2C₂₀E₂)(K₂(0) − 3C₀₀E₂))`,
/// `‖c‖_∞ ≤ 2C₀₁E₂ / ((|K₂⁽⁰,²⁾(0)| − C₀₂E₂)(K₂(0) − 3C₀₀E₂))`,
/// `v_m a_m ≥ (1/K₂(0))(1 − 3C₀₀E₂/(K₂(0) − 3C₀₀E₂))`.
///
/// The seven conditions, each written as a lower limit on `ν³`, are the
/// invertibility of the `(0,2)` block, of its Schur complement, of the
/// `(2,0)` block, the two off-diagonal smallness conditions on `E₂`, the
/// `b`-block condition, and positivity of `K₂(0) − 3C₀₀E₂`.
pub fn theoretical_bounds_2d(report: &Admissibility2dReport, nu: f64) -> Result<CoefficientBounds2d> {
    check_nu(nu)?;
    if !report.passed {
        return Err(Error::InvalidArgument("kernel did not pass the bivariate admissibility checks".into()));
    }
    let c = |a, b| report.constant(a, b);
    let k00 = report.k00;
    let k20 = report.k20_0.abs();
    let k02 = report.k02_0.abs();
    // E₂ ≤ X  ⇔  ν³ ≥ 3π²/(2X)
    let from_e2 = |x: f64| 3.0 * PI2 / (2.0 * x);
    let e2_cap = (c(0, 0) * k20 / (2.0 * (2.0 * c(1, 0).powi(2) + c(2, 0) * c(0, 0))))
        .min(c(0, 0) * k02 / (c(0, 1).powi(2) + c(0, 0) * c(0, 2)));
    let thresholds = [
        3.0 * PI2 * c(0, 2) / (2.0 * k02),
        3.0 * PI2 * (c(1, 1).powi(2) + c(2, 0) * c(0, 2)) / (2.0 * c(2, 0) * k02),
        3.0 * PI2 * c(2, 0) / k20,
        from_e2(c(1, 0) * k02 / (c(1, 1) * c(0, 1) + c(1, 0) * c(0, 2))),
        from_e2(e2_cap),
        from_e2(c(0, 1) * k20 / (2.0 * (c(1, 1) * c(1, 0) + c(0, 1) * c(2, 0)))),
        9.0 * PI2 * c(0, 0) / (2.0 * k00),
    ];
    let nu3 = nu.powi(3);
    let strict = [false, false, true, false, false, false, true];
    let offending = thresholds
        .iter()
        .zip(strict)
        .position(|(&th, s)| if s { nu3 <= th } else { nu3 < th || !th.is_finite() });
    let mut out = CoefficientBounds2d {
        nu,
        a_inf_bound: f64::INFINITY,
        b_inf_bound: f64::INFINITY,
        c_inf_bound: f64::INFINITY,
        a_lower: 0.0,
        nu3_thresholds: thresholds,
        applicable: offending.is_none(),
        offending_threshold: offending,
    };
    if out.applicable {
        let e2 = e2_nu(nu)?;
        let a_den = k00 - 3.0 * c(0, 0) * e2;
        out.a_inf_bound = 1.0 / a_den;
        out.b_inf_bound = 2.0 * c(1, 0) * e2 / ((k20 - 2.0 * c(2, 0) * e2) * a_den);
        out.c_inf_bound = 2.0 * c(0, 1) * e2 / ((k02 - c(0, 2) * e2) * a_den);
        out.a_lower = (1.0 - 3.0 * c(0, 0) * e2 / a_den) / k00;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_table() -> AdmissibilityReport {
        AdmissibilityReport::from_constants([1.22, 1.59, 2.04, 2.6], 1.0, -1.0, 0.5, 0.66, 0.88)
    }

    fn cauchy_table() -> AdmissibilityReport {
        AdmissibilityReport::from_constants([1.0, 1.0, 2.0, 5.22], 1.0, -2.0, 0.3, 1.1, 0.9)
    }

    #[test]
    fn e_values() {
        assert!((e_nu(1.0).unwrap() - PI2 / 6.0).abs() < 1e-15);
        assert!((e_nu(PI).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((e2_nu(2.0).unwrap() - 3.0 * PI2 / 16.0).abs() < 1e-15);
        assert!(e_nu(0.0).is_err() && e2_nu(-1.0).is_err());
    }

    #[test]
    fn gaussian_bounds_at_ten() {
        let b = theoretical_bounds(&gaussian_table(), 10.0).unwrap();
        assert!(b.applicable);
        let expect = 300.0 / (300.0 - 2.0 * PI2 * 1.22);
        assert!((b.a_inf_bound - expect).abs() < 1e-12);
        assert!((b.a_inf_bound - 1.0873).abs() < 1e-4);
        assert!((b.b_inf_bound / b.b_inf_bound_printed - 300.0).abs() < 1e-9);
        assert!(b.a_lower > 0.0 && b.a_lower < 1.0);
    }

    #[test]
    fn gaussian_limit() {
        let b = theoretical_bounds(&gaussian_table(), 1e6).unwrap();
        assert!((b.a_inf_bound - 1.0).abs() < 1e-10);
        assert!(b.b_inf_bound < 1e-10);
        assert!((b.a_lower - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cauchy_at_one_not_applicable() {
        let b = theoretical_bounds(&cauchy_table(), 1.0).unwrap();
        assert!(!b.applicable);
        assert!((b.nu_thresholds[2] - 2.0 * PI2 / 3.0).abs() < 1e-12);
        assert!(b.offending_threshold.is_some());
        assert!(b.a_inf_bound.is_infinite());
    }

    #[test]
    fn rings() {
        assert_eq!(ring_count(&[], (0.0, 0.0), 1.0, 1), 0);
        let pts = [(1.5, 1.5), (-1.5, 1.5), (1.5, -1.5), (-1.5, -1.5)];
        assert_eq!(ring_count(&pts, (0.0, 0.0), 1.0, 1), 4);
        assert_eq!(ring_count(&pts, (0.0, 0.0), 1.0, 2), 0);
    }
}
