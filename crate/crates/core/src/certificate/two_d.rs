use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::one_d::{check_signs, solve_interpolation};
use super::{CertificateVerification, VerifyOptions, INTERP_TOL};
use crate::error::{Error, Result};
use crate::exec;
use crate::kernel::KernelSpec;

/// Largest probe count per axis in 2D verification.
pub const MAX_PROBES_PER_AXIS: usize = 2000;

/// Bivariate certificate
/// `q(t,u) = Σ a_m K₂ + b_m K₂⁽¹,⁰⁾ + c_m K₂⁽⁰,¹⁾`, each evaluated at
/// `(t − t_m, u − u_m)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate2D {
    pub support: Vec<(f64, f64)>,
    pub signs: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(skip)]
    kernel: Option<KernelSpec>,
}

impl Certificate2D {
    pub fn kernel(&self) -> &KernelSpec {
        self.kernel.as_ref().expect("certificate constructed by solve_certificate_2d")
    }

    /// `∂ᵗ∂ᵘ q` for `order_t + order_u ≤ 2`.
    pub fn eval_q2(&self, t: f64, u: f64, order_t: usize, order_u: usize) -> Result<f64> {
        if order_t + order_u > 2 {
            return Err(Error::UnsupportedOrder { order: order_t + order_u, max: 2 });
        }
        Ok(self.q(t, u, order_t, order_u))
    }

    #[inline]
    fn q(&self, t: f64, u: f64, ot: usize, ou: usize) -> f64 {
        let k = self.kernel();
        let mut s = 0.0;
        for (m, &(tm, um)) in self.support.iter().enumerate() {
            let (dt, du) = (t - tm, u - um);
            s += self.a[m] * k.value2(dt, du, ot, ou)
                + self.b[m] * k.value2(dt, du, ot + 1, ou)
                + self.c[m] * k.value2(dt, du, ot, ou + 1);
        }
        s
    }
}

fn check_distinct_2d(support: &[(f64, f64)]) -> Result<()> {
    if let Some(i) = support.iter().position(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite support point at {i}")));
    }
    let mut idx: Vec<usize> = (0..support.len()).collect();
    idx.sort_by(|&i, &j| support[i].0.total_cmp(&support[j].0).then(support[i].1.total_cmp(&support[j].1)));
    match idx.windows(2).find(|w| support[w[0]] == support[w[1]]) {
        Some(w) => Err(Error::DuplicateSupport(w[1])),
        None => Ok(()),
    }
}

/// The `3M × 3M` system
///
/// ```text
///     [ G⁰⁰ G¹⁰ G⁰¹ ]
///     [ G¹⁰ G²⁰ G¹¹ ]
///     [ G⁰¹ G¹¹ G⁰² ]
/// ```
///
/// with `(Gˡᵐ)_{k,j} = K₂⁽ˡ,ᵐ⁾(t_k − t_j, u_k − u_j)`. Even-order blocks are
/// symmetric and the first-order blocks antisymmetric.
pub fn build_system_2d(kernel: &KernelSpec, support: &[(f64, f64)]) -> Result<DMatrix<f64>> {
    kernel.require_dim(2)?;
    check_distinct_2d(support)?;
    let m = support.len();
    let layout = [[(0, 0), (1, 0), (0, 1)], [(1, 0), (2, 0), (1, 1)], [(0, 1), (1, 1), (0, 2)]];
    let mut sys = DMatrix::zeros(3 * m, 3 * m);
    for (k, &(tk, uk)) in support.iter().enumerate() {
        for (j, &(tj, uj)) in support.iter().enumerate() {
            let (dt, du) = (tk - tj, uk - uj);
            for (br, row) in layout.iter().enumerate() {
                for (bc, &(ot, ou)) in row.iter().enumerate() {
                    sys[(br * m + k, bc * m + j)] = kernel.value2(dt, du, ot, ou);
                }
            }
        }
    }
    Ok(sys)
}

/// Solves for `(a, b, c)` with right-hand side `(v, 0, 0)`.
pub fn solve_certificate_2d(kernel: &KernelSpec, support: &[(f64, f64)], signs: &[f64]) -> Result<Certificate2D> {
    let sys = build_system_2d(kernel, support)?;
    let m = support.len();
    check_signs(signs, m)?;
    let mut rhs = DVector::zeros(3 * m);
    rhs.rows_mut(0, m).copy_from_slice(signs);
    let x = solve_interpolation(&sys, &rhs)?;
    let block = |i: usize| x.rows(i * m, m).iter().copied().collect::<Vec<_>>();
    let cert = Certificate2D {
        support: support.to_vec(),
        signs: signs.to_vec(),
        a: block(0),
        b: block(1),
        c: block(2),
        kernel: Some(kernel.clone()),
    };
    let (interp, grad) = residuals(&cert);
    if interp > INTERP_TOL || grad > INTERP_TOL {
        return Err(Error::Singular { condition: f64::NAN });
    }
    Ok(cert)
}

fn residuals(cert: &Certificate2D) -> (f64, f64) {
    cert.support.iter().zip(&cert.signs).fold((0.0f64, 0.0f64), |(i, g), (&(t, u), &v)| {
        (i.max((cert.q(t, u, 0, 0) - v).abs()), g.max(cert.q(t, u, 1, 0).abs()).max(cert.q(t, u, 0, 1).abs()))
    })
}

#[derive(Clone, Copy)]
struct RowStats {
    max_q: f64,
    near: f64,
    far: f64,
    hessian_ok: bool,
}

impl RowStats {
    const EMPTY: Self = Self { max_q: f64::NEG_INFINITY, near: f64::INFINITY, far: f64::INFINITY, hessian_ok: true };

    fn merge(self, o: Self) -> Self {
        Self {
            max_q: self.max_q.max(o.max_q),
            near: self.near.min(o.near),
            far: self.far.min(o.far),
            hessian_ok: self.hessian_ok && o.hessian_ok,
        }
    }
}

/// Probes `q` on a square grid around the support.
///
/// Distances are max-norm. Inside the near regions
/// `‖p − p_k‖_∞ ≤ min(ε, 0.2)` the Hessian of `v_k q` must be negative
/// definite (negative trace, positive determinant); the dip margin uses the
/// squared Euclidean distance there.
pub fn verify_certificate_2d(cert: &Certificate2D, opts: &VerifyOptions) -> Result<CertificateVerification> {
    if !(opts.probe_step > 0.0) {
        return Err(Error::InvalidArgument(format!("probe step must be positive, got {}", opts.probe_step)));
    }
    if cert.support.is_empty() {
        return Err(Error::InvalidArgument("empty support".into()));
    }
    let (interp, grad) = residuals(cert);
    let bbox = cert.support.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |b, &(t, u)| (b.0.min(t), b.1.max(t), b.2.min(u), b.3.max(u)),
    );
    let (t0, u0) = (bbox.0 - opts.probe_extent, bbox.2 - opts.probe_extent);
    let nt = ((bbox.1 + opts.probe_extent - t0) / opts.probe_step).ceil() as usize + 1;
    let nu = ((bbox.3 + opts.probe_extent - u0) / opts.probe_step).ceil() as usize + 1;
    if nt > MAX_PROBES_PER_AXIS || nu > MAX_PROBES_PER_AXIS {
        return Err(Error::InvalidArgument(format!(
            "probe grid {nt}×{nu} exceeds {MAX_PROBES_PER_AXIS} per axis"
        )));
    }
    let k0 = cert.kernel().value2(0.0, 0.0, 0, 0);
    let dip = opts.beta / (4.0 * k0);
    let plateau = 1.0 - dip * opts.epsilon * opts.epsilon;
    let eps1 = opts.epsilon.min(0.2);

    let rows = exec::map_indexed(opts.mode, nt, |i| {
        let t = t0 + i as f64 * opts.probe_step;
        let mut st = RowStats::EMPTY;
        for j in 0..nu {
            let u = u0 + j as f64 * opts.probe_step;
            let (d, v, d2) = cert
                .support
                .iter()
                .zip(&cert.signs)
                .map(|(&(tm, um), &v)| {
                    let (dt, du) = (t - tm, u - um);
                    (dt.abs().max(du.abs()), v, dt * dt + du * du)
                })
                .fold((f64::INFINITY, 0.0, 0.0), |b, x| if x.0 < b.0 { x } else { b });
            if d <= eps1 {
                let (htt, huu, htu) = (cert.q(t, u, 2, 0), cert.q(t, u, 0, 2), cert.q(t, u, 1, 1));
                let ok = v * (htt + huu) < 0.0 && htt * huu - htu * htu > 0.0;
                st.hessian_ok &= ok;
            }
            if d < opts.exclusion_radius {
                continue;
            }
            let q = cert.q(t, u, 0, 0);
            st.max_q = st.max_q.max(q.abs());
            if d <= opts.epsilon {
                st.near = st.near.min(1.0 - dip * d2 - v * q);
            } else {
                st.far = st.far.min(plateau - q.abs());
            }
        }
        st
    });
    let st = rows.into_iter().fold(RowStats::EMPTY, RowStats::merge);
    let valid = interp <= INTERP_TOL && grad <= INTERP_TOL && st.max_q < 1.0;
    Ok(CertificateVerification {
        max_interp_residual: interp,
        max_gradient_residual: grad,
        max_abs_q_off_support: st.max_q,
        near_region_margin: st.near,
        far_region_margin: st.far,
        hessian_negative_definite: Some(st.hessian_ok),
        probes: nt * nu,
        valid,
    })
}
