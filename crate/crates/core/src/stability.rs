//! ℓ1 error bound for noisy grid recovery.
//!
//! For samples on a grid of density `N`, pulse width `σ`, separation `ν`
//! (σ units) and noise budget `‖y − Kx‖₁ ≤ δ`, the δ-constrained ℓ1
//! minimizer satisfies
//!
//! ```text
//!     ‖x̂ − x‖₁ ≤ 72 K(0)|K⁽²⁾(0)| γ² δ / (9βK(0)|K⁽²⁾(0)| − D₁ν⁻² − D₂ν⁻⁴)
//! ```
//!
//! with `γ = max{Nσ, 1/ε}`, `D₁ = 3π²(C₂β + 2C₀β + 8C₁²K(0)γ²)` and
//! `D₂ = 4π⁴C₁²K(0)γ²`. For large ν this relaxes to `16γ²δ/β`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::AdmissibilityReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub gamma: f64,
    pub d1: f64,
    pub d2: f64,
    /// `+∞` when the denominator is not positive.
    pub bound: f64,
    pub simplified_bound: f64,
    pub denominator: f64,
    pub valid: bool,
}

/// Evaluates the bound. An invalid denominator is reported through `valid`
/// rather than an error so ν-sweeps can cross the invalid region.
pub fn l1_error_bound(report: &AdmissibilityReport, nu: f64, n_grid: u32, sigma: f64, delta: f64) -> Result<BoundReport> {
    if !report.passed {
        return Err(Error::InvalidArgument("kernel did not pass the admissibility checks".into()));
    }
    for (name, v) in [("nu", nu), ("sigma", sigma)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be nonnegative, got {delta}")));
    }
    let (c0, c1, c2) = (report.c0(), report.c1(), report.c2());
    let (k0, k2, beta) = (report.k0, report.k2_0.abs(), report.beta);
    let gamma = (n_grid as f64 * sigma).max(1.0 / report.epsilon);
    let g2 = gamma * gamma;
    let d1 = 3.0 * PI * PI * (c2 * beta + 2.0 * c0 * beta + 8.0 * c1 * c1 * k0 * g2);
    let d2 = 4.0 * PI.powi(4) * c1 * c1 * k0 * g2;
    let denominator = 9.0 * beta * k0 * k2 - d1 / (nu * nu) - d2 / nu.powi(4);
    let valid = denominator > 0.0;
    let bound = if valid { 72.0 * k0 * k2 * g2 * delta / denominator } else { f64::INFINITY };
    Ok(BoundReport { gamma, d1, d2, bound, simplified_bound: 16.0 * g2 * delta / beta, denominator, valid })
}

/// Smallest ν (σ units) at which the denominator turns positive.
pub fn min_valid_nu(report: &BoundReport, k0: f64, k2: f64, beta: f64) -> f64 {
    // 9βK0|K2| x² − D1 x − D2 = 0 in x = ν², positive root
    let a = 9.0 * beta * k0 * k2.abs();
    let x = (report.d1 + (report.d1 * report.d1 + 4.0 * a * report.d2).sqrt()) / (2.0 * a);
    x.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundAudit {
    pub holds: bool,
    pub slack: f64,
}

pub fn audit_bound(report: &BoundReport, observed_l1_error: f64) -> Result<BoundAudit> {
    if !report.valid {
        return Err(Error::InvalidArgument(format!(
            "bound is invalid at this separation (denominator {:.3e})",
            report.denominator
        )));
    }
    Ok(BoundAudit { holds: observed_l1_error <= report.bound, slack: report.bound - observed_l1_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> AdmissibilityReport {
        AdmissibilityReport::from_constants([1.22, 1.59, 2.04, 2.6], 1.0, -1.0, 0.5, 0.662, 0.88)
    }

    #[test]
    fn gaussian_plug_in() {
        let r = l1_error_bound(&gaussian(), 2.0, 100, 0.1, 1.0).unwrap();
        assert!((r.gamma - 10.0).abs() < 1e-12);
        assert!((r.simplified_bound - 1600.0 / 0.662).abs() < 1e-9);
        assert!((r.simplified_bound - 2417.0).abs() < 1.0);
        assert!(!r.valid && r.bound.is_infinite());
    }

    #[test]
    fn large_separation_limit() {
        let rep = gaussian();
        let r = l1_error_bound(&rep, 1e7, 100, 0.1, 1.0).unwrap();
        let limit = 8.0 * 100.0 / 0.662;
        assert!(r.valid);
        assert!((r.bound - limit).abs() / limit < 1e-6);
        assert!(r.bound <= r.simplified_bound);
    }

    #[test]
    fn validity_threshold() {
        let rep = gaussian();
        let r = l1_error_bound(&rep, 1.0, 100, 0.1, 1.0).unwrap();
        let nu = min_valid_nu(&r, 1.0, -1.0, 0.662);
        assert!(!l1_error_bound(&rep, nu * 0.999, 100, 0.1, 1.0).unwrap().valid);
        assert!(l1_error_bound(&rep, nu * 1.001, 100, 0.1, 1.0).unwrap().valid);
    }

    #[test]
    fn audit() {
        let mut r = l1_error_bound(&gaussian(), 1e3, 100, 0.1, 1.0).unwrap();
        r.bound = 100.0;
        assert_eq!(audit_bound(&r, 3.0).unwrap(), BoundAudit { holds: true, slack: 97.0 });
        assert!(!audit_bound(&r, 101.0).unwrap().holds);
        r.valid = false;
        assert!(audit_bound(&r, 1.0).is_err());
    }
}
