//! Dual certificates.
//!
//! For a support `{t_m}` and signs `{v_m}` the interpolating function
//!
//! ```text
//!     q(t) = Σ_m a_m K(t − t_m) + b_m K⁽¹⁾(t − t_m)
//! ```
//!
//! is fixed by `q(t_m) = v_m`, `q⁽¹⁾(t_m) = 0`. When additionally
//! `|q(t)| < 1` off the support, the spike train is the unique TV minimizer.
//! The bivariate form adds a `c_m K₂⁽⁰,¹⁾` term and a second gradient
//! condition. Everything here works in σ-normalized coordinates (σ = 1);
//! rescale with `q_σ(t) = q(t/σ)`.

mod bounds;
mod one_d;
mod two_d;

pub use bounds::{
    e2_nu, e_nu, ring_count, theoretical_bounds, theoretical_bounds_2d, CoefficientBounds, CoefficientBounds2d,
};
pub use one_d::{build_system_1d, solve_certificate_1d, verify_certificate, Certificate1D};
pub use two_d::{build_system_2d, solve_certificate_2d, verify_certificate_2d, Certificate2D};

use serde::{Deserialize, Serialize};

use crate::exec::ExecMode;

/// Largest condition estimate accepted for a certificate system.
pub const MAX_CONDITION: f64 = 1e12;

/// Interpolation residual allowed in a solved certificate.
pub const INTERP_TOL: f64 = 1e-8;

/// Probe settings for certificate verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Probe spacing (σ units); at most 1e−3 in 1D.
    pub probe_step: f64,
    /// Margin probed beyond the support's bounding box.
    pub probe_extent: f64,
    /// Probe points closer than this to a support point are skipped in the
    /// `|q| < 1` test. Defaults to one probe step.
    pub exclusion_radius: f64,
    /// Local-property radius ε used for the near/far region diagnostics.
    pub epsilon: f64,
    /// Concavity constant β used for the quadratic-dip diagnostic.
    pub beta: f64,
    #[serde(skip)]
    pub mode: ExecMode,
}

impl VerifyOptions {
    pub fn new(probe_step: f64, probe_extent: f64, epsilon: f64, beta: f64) -> Self {
        Self { probe_step, probe_extent, exclusion_radius: probe_step, epsilon, beta, mode: ExecMode::default() }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_exclusion(mut self, radius: f64) -> Self {
        self.exclusion_radius = radius;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateVerification {
    pub max_interp_residual: f64,
    pub max_gradient_residual: f64,
    pub max_abs_q_off_support: f64,
    /// `min (1 − β(t − t_k)²/(4K(0))) − v_k q(t)` over probes with
    /// `0 < |t − t_k| ≤ ε`; nonnegative when the quadratic dip holds.
    pub near_region_margin: f64,
    /// `min (1 − βε²/(4K(0))) − |q(t)|` over probes farther than ε from the
    /// support; nonnegative when the far-region bound holds.
    pub far_region_margin: f64,
    /// 2D only: whether `v_k ∇²q` was negative definite at every probe in
    /// the near regions.
    pub hessian_negative_definite: Option<bool>,
    pub probes: usize,
    pub valid: bool,
}
