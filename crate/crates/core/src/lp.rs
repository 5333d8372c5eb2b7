//! Dense primal-dual interior-point solver for linear programs
//!
//! ```text
//!     minimize    cᵀz
//!     subject to  A_ub z ≤ b_ub
//!                 A_eq z = b_eq
//!                 z ≥ 0
//! ```
//!
//! Inequalities get explicit slacks, giving the equality form
//! `A x = b, x ≥ 0`, which is solved by Mehrotra's predictor-corrector
//! method on the normal equations `A D Aᵀ Δλ = r` with `D = X S⁻¹`.
//! The normal matrix becomes nearly singular close to the optimum (and is
//! already badly conditioned when `A` contains a smooth convolution
//! matrix), so the Cholesky factorization carries a small diagonal shift
//! and skips pivots that have vanished, followed by iterative refinement
//! against the unshifted matrix. A run that still stalls is repeated with
//! directions taken from the augmented system where the normal equations
//! lose the primal equation, and the best iterate is snapped onto its
//! optimal face before the tolerances are checked.
//!
//! Everything is deterministic: no randomized pivoting, no threading inside
//! a solve.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `min cᵀz  s.t.  A_ub z ≤ b_ub,  A_eq z = b_eq,  z ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpStandardForm {
    pub cost: DVector<f64>,
    pub a_ub: DMatrix<f64>,
    pub b_ub: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
}

impl LpStandardForm {
    pub fn new(
        cost: DVector<f64>,
        a_ub: DMatrix<f64>,
        b_ub: DVector<f64>,
        a_eq: DMatrix<f64>,
        b_eq: DVector<f64>,
    ) -> Result<Self> {
        let n = cost.len();
        if a_ub.ncols() != n && a_ub.nrows() > 0 || a_eq.ncols() != n && a_eq.nrows() > 0 {
            return Err(Error::Shape("constraint matrices must have one column per variable".into()));
        }
        if a_ub.nrows() != b_ub.len() || a_eq.nrows() != b_eq.len() {
            return Err(Error::Shape("constraint rows and right-hand sides differ in length".into()));
        }
        // normalize empty blocks to 0×n so later stacking is uniform
        let a_ub = if a_ub.nrows() == 0 { DMatrix::zeros(0, n) } else { a_ub };
        let a_eq = if a_eq.nrows() == 0 { DMatrix::zeros(0, n) } else { a_eq };
        Ok(Self { cost, a_ub, b_ub, a_eq, b_eq })
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_ub(&self) -> usize {
        self.a_ub.nrows()
    }

    pub fn num_eq(&self) -> usize {
        self.a_eq.nrows()
    }

    /// Largest violation of `A_ub z ≤ b_ub`, `A_eq z = b_eq`, `z ≥ 0`.
    pub fn max_violation(&self, z: &DVector<f64>) -> f64 {
        let ub = (&self.a_ub * z - &self.b_ub).iter().fold(0.0f64, |m, &v| m.max(v));
        let eq = (&self.a_eq * z - &self.b_eq).amax();
        let neg = z.iter().fold(0.0f64, |m, &v| m.max(-v));
        ub.max(eq).max(neg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpOptions {
    pub max_iters: usize,
    /// Relative primal/dual infeasibility tolerance.
    pub feas_tol: f64,
    /// Relative duality-gap tolerance.
    pub opt_tol: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self { max_iters: 200, feas_tol: 1e-9, opt_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub z: DVector<f64>,
    /// Multipliers of the inequality rows (`≤ 0` at optimality in the
    /// convention `cᵀz ≥ b_ubᵀ y_ub + b_eqᵀ y_eq`).
    pub y_ub: DVector<f64>,
    pub y_eq: DVector<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub iterations: usize,
    /// Relative primal residual at exit.
    pub primal_infeasibility: f64,
    /// Relative dual residual at exit.
    pub dual_infeasibility: f64,
    /// Relative duality gap at exit.
    pub gap: f64,
}

/// Equality-form data after adding slacks and row equilibration.
struct Equality {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    row_scale: DVector<f64>,
}

impl Equality {
    fn from_standard(lp: &LpStandardForm) -> Self {
        let n = lp.num_vars();
        let mu = lp.num_ub();
        let me = lp.num_eq();
        let m = mu + me;
        let nt = n + mu;
        let mut a = DMatrix::zeros(m, nt);
        a.view_mut((0, 0), (mu, n)).copy_from(&lp.a_ub);
        for i in 0..mu {
            a[(i, n + i)] = 1.0;
        }
        a.view_mut((mu, 0), (me, n)).copy_from(&lp.a_eq);
        let mut b = DVector::zeros(m);
        b.rows_mut(0, mu).copy_from(&lp.b_ub);
        b.rows_mut(mu, me).copy_from(&lp.b_eq);
        let mut c = DVector::zeros(nt);
        c.rows_mut(0, n).copy_from(&lp.cost);

        let row_scale = DVector::from_fn(m, |i, _| {
            let r = a.row(i).amax();
            if r > 0.0 {
                1.0 / r
            } else {
                1.0
            }
        });
        for i in 0..m {
            let s = row_scale[i];
            a.row_mut(i).scale_mut(s);
            b[i] *= s;
        }
        Self { a, b, c, row_scale }
    }
}

/// Cholesky factor of the normal matrix. Pivots that have lost all
/// precision are replaced by a huge value, which zeroes the corresponding
/// direction component instead of failing the factorization; this is what
/// lets the iteration finish once `x/s` spans many orders of magnitude.
struct NormalSolver {
    /// Lower triangle; the strict upper part is ignored.
    l: DMatrix<f64>,
}

const SKIPPED_PIVOT: f64 = 1e64;

impl NormalSolver {
    fn factor(m: &DMatrix<f64>) -> Option<Self> {
        let n = m.nrows();
        let mut l = m.clone();
        // left-looking, column by column
        for j in 0..n {
            for k in 0..j {
                let ljk = l[(j, k)];
                if ljk != 0.0 {
                    for i in j..n {
                        l[(i, j)] -= l[(i, k)] * ljk;
                    }
                }
            }
            let d = l[(j, j)];
            if !d.is_finite() {
                return None;
            }
            if d <= 1e-12 * m[(j, j)].abs() || d <= f64::MIN_POSITIVE {
                l[(j, j)] = SKIPPED_PIVOT;
                for i in j + 1..n {
                    l[(i, j)] = 0.0;
                }
                continue;
            }
            let r = d.sqrt();
            l[(j, j)] = r;
            for i in j + 1..n {
                l[(i, j)] /= r;
            }
        }
        Some(Self { l })
    }

    fn solve_factored(&self, r: &DVector<f64>) -> DVector<f64> {
        let n = self.l.nrows();
        let mut x = r.clone();
        for j in 0..n {
            x[j] /= self.l[(j, j)];
            let xj = x[j];
            for i in j + 1..n {
                x[i] -= self.l[(i, j)] * xj;
            }
        }
        for j in (0..n).rev() {
            let mut acc = x[j];
            for i in j + 1..n {
                acc -= self.l[(i, j)] * x[i];
            }
            x[j] = acc / self.l[(j, j)];
        }
        x
    }

    /// Solves `M x = r` with two steps of iterative refinement.
    fn solve(&self, m: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
        let mut x = self.solve_factored(r);
        for _ in 0..2 {
            let res = r - m * &x;
            x += self.solve_factored(&res);
        }
        x
    }
}

fn step_to_boundary(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&x, &d)| -x / d)
        .fold(1.0f64, f64::min)
}

/// Normal matrix `A diag(d) Aᵀ`.
fn normal_matrix(a: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let mut ad = a.clone();
    for (j, mut col) in ad.column_iter_mut().enumerate() {
        col *= d[j];
    }
    &ad * a.transpose()
}

#[derive(Clone)]
struct Best {
    x: DVector<f64>,
    lam: DVector<f64>,
    s: DVector<f64>,
    pinf: f64,
    dinf: f64,
    gap: f64,
}

impl Best {
    fn merit(&self) -> f64 {
        self.pinf.max(self.dinf).max(self.gap)
    }
}

/// Snaps an interior iterate to the face picked out by strict
/// complementarity: variables with `x_j ≥ s_j` stay basic, the rest are
/// fixed at zero. The basic values solve `A_B x_B = b` and the multipliers
/// are the point nearest `λ` with `A_Bᵀ λ = c_B`, both in the least-squares
/// sense, so the duality gap on the returned pair is at rounding level.
/// The caller decides whether the result meets the tolerances.
fn snap_to_face(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    x: &DVector<f64>,
    lam: &DVector<f64>,
    s: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let basic: Vec<usize> = (0..x.len()).filter(|&j| x[j] >= s[j]).collect();
    if basic.is_empty() {
        return None;
    }
    let ab = a.select_columns(&basic);
    let svd = ab.clone().svd(true, true);
    let cut = 1e-12 * svd.singular_values.max();
    let xb = svd.solve(b, cut).ok()?;
    let mut xs = DVector::zeros(x.len());
    for (k, &j) in basic.iter().enumerate() {
        xs[j] = xb[k].max(0.0);
    }
    let cb = DVector::from_iterator(basic.len(), basic.iter().map(|&j| c[j]));
    let svd_t = ab.transpose().svd(true, true);
    let cut_t = 1e-12 * svd_t.singular_values.max();
    let dl = svd_t.solve(&(cb - ab.transpose() * lam), cut_t).ok()?;
    let lam_s = lam + dl;
    (xs.iter().chain(lam_s.iter()).all(|v| v.is_finite())).then_some((xs, lam_s))
}

/// Solves `lp` with the predictor-corrector interior-point method.
pub fn solve(lp: &LpStandardForm, opts: &LpOptions) -> LpSolution {
    let first = solve_with(lp, opts, false);
    match first.status {
        LpStatus::NumericalFailure | LpStatus::IterationLimit => {
            let second = solve_with(lp, opts, true);
            if second.status == LpStatus::Optimal { second } else { first }
        }
        _ => first,
    }
}

/// One interior-point run. With `use_augmented`, directions whose primal
/// equation the normal equations failed to resolve are recomputed from the
/// augmented system.
fn solve_with(lp: &LpStandardForm, opts: &LpOptions, use_augmented: bool) -> LpSolution {
    let n = lp.num_vars();
    let eqf = Equality::from_standard(lp);
    let (a, b, c) = (&eqf.a, &eqf.b, &eqf.c);
    let m = a.nrows();
    let nt = a.ncols();

    let finish = |x: &DVector<f64>, lam: &DVector<f64>, status: LpStatus, iterations: usize, pinf, dinf, gap| {
        let z = x.rows(0, n).into_owned();
        let y = lam.component_mul(&eqf.row_scale);
        LpSolution {
            objective: lp.cost.dot(&z),
            z,
            y_ub: y.rows(0, lp.num_ub()).into_owned(),
            y_eq: y.rows(lp.num_ub(), lp.num_eq()).into_owned(),
            status,
            iterations,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            gap,
        }
    };

    if m == 0 {
        // only bounds: z = 0 is optimal iff c ≥ 0
        let x = DVector::zeros(nt);
        let status = if lp.cost.iter().all(|&v| v >= 0.0) { LpStatus::Optimal } else { LpStatus::Infeasible };
        return finish(&x, &DVector::zeros(0), status, 0, 0.0, 0.0, 0.0);
    }

    // Mehrotra starting point
    // AAᵀ is often numerically singular here (smooth kernels); a damped
    // least-squares start keeps x and λ at the scale of the data.
    let mut aat = a * a.transpose();
    let dmax = aat.diagonal().amax();
    for i in 0..m {
        aat[(i, i)] += 1e-10 * dmax + f64::MIN_POSITIVE;
    }
    let Some(fac) = NormalSolver::factor(&aat) else {
        return finish(&DVector::zeros(nt), &DVector::zeros(m), LpStatus::NumericalFailure, 0, f64::NAN, f64::NAN, f64::NAN);
    };
    let mut x = a.transpose() * fac.solve_factored(b);
    let mut lam = fac.solve_factored(&(a * c));
    let mut s = c - a.transpose() * &lam;
    let dx = (-1.5 * x.min()).max(0.0);
    let ds = (-1.5 * s.min()).max(0.0);
    x.add_scalar_mut(dx);
    s.add_scalar_mut(ds);
    let xs = x.dot(&s);
    let (sx, ss) = (x.sum(), s.sum());
    if xs > 0.0 && sx > 0.0 && ss > 0.0 {
        x.add_scalar_mut(0.5 * xs / ss);
        s.add_scalar_mut(0.5 * xs / sx);
    } else {
        x.fill(1.0);
        s.fill(1.0);
    }
    // guard against a degenerate start (e.g. b = 0 and c = const)
    x.iter_mut().for_each(|v| *v = v.max(1e-8));
    s.iter_mut().for_each(|v| *v = v.max(1e-8));

    let bnorm = 1.0 + b.amax();
    let cnorm = 1.0 + c.amax();
    let mut best: Option<Best> = None;
    let mut stalls = 0;

    // Tries to snap the best iterate onto its optimal face; reports the
    // snapped point as optimal only if it meets the tolerances, and the best
    // iterate with `status` otherwise.
    let settle = |best: Option<Best>, status: LpStatus, iter: usize| -> LpSolution {
        let Some(bst) = best else {
            return finish(&DVector::zeros(nt), &DVector::zeros(m), status, iter, f64::NAN, f64::NAN, f64::NAN);
        };
        if let Some((xs, ls)) = snap_to_face(a, b, c, &bst.x, &bst.lam, &bst.s) {
            let pobj = c.dot(&xs);
            let pinf = (b - a * &xs).amax() / bnorm;
            let dinf = (c - a.transpose() * &ls).iter().fold(0.0f64, |v, &r| v.max(-r)) / cnorm;
            let gap = (pobj - b.dot(&ls)).abs() / (1.0 + pobj.abs());
            if pinf <= opts.feas_tol && dinf <= opts.feas_tol && gap <= opts.opt_tol {
                return finish(&xs, &ls, LpStatus::Optimal, iter, pinf, dinf, gap);
            }
        }
        finish(&bst.x, &bst.lam, status, iter, bst.pinf, bst.dinf, bst.gap)
    };

    for iter in 0..opts.max_iters {
        let rp = b - a * &x;
        let rd = c - a.transpose() * &lam - &s;
        let pobj = c.dot(&x);
        let dobj = b.dot(&lam);
        let pinf = rp.amax() / bnorm;
        let dinf = rd.amax() / cnorm;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        if !(pinf.is_finite() && dinf.is_finite() && gap.is_finite()) {
            return settle(best, LpStatus::NumericalFailure, iter);
        }
        if pinf <= opts.feas_tol && dinf <= opts.feas_tol && gap <= opts.opt_tol {
            return finish(&x, &lam, LpStatus::Optimal, iter, pinf, dinf, gap);
        }
        let merit = pinf.max(dinf).max(gap);
        match &best {
            Some(bst) if bst.merit() <= merit => stalls += 1,
            _ => {
                best = Some(Best { x: x.clone(), lam: lam.clone(), s: s.clone(), pinf, dinf, gap });
                stalls = 0;
            }
        }
        // unbounded dual ray with vanishing dual residual: primal infeasible
        if lam.amax() > 1e12 * cnorm && dinf <= opts.feas_tol && dobj > 1e10 * cnorm {
            return finish(&x, &lam, LpStatus::Infeasible, iter, pinf, dinf, gap);
        }
        if stalls == 3 {
            let out = settle(best.clone(), LpStatus::NumericalFailure, iter);
            if out.status == LpStatus::Optimal {
                return out;
            }
        }
        if stalls > 25 {
            return settle(best, LpStatus::NumericalFailure, iter);
        }

        let mu = x.dot(&s) / nt as f64;
        let d = x.component_div(&s);
        let nm = normal_matrix(a, &d);
        let mut shifted = nm.clone();
        let dmax = nm.diagonal().amax();
        for i in 0..m {
            shifted[(i, i)] += 1e-14 * dmax;
        }
        let Some(fac) = NormalSolver::factor(&shifted) else {
            return settle(best, LpStatus::NumericalFailure, iter);
        };

        // Newton system A dx = r_p, Aᵀ dλ + ds = r_d, S dx + X ds = r_c
        let newton = |r_p: &DVector<f64>, r_d: &DVector<f64>, r_c: &DVector<f64>| {
            let sinv_rc = r_c.component_div(&s);
            let rhs = r_p - a * (&sinv_rc - d.component_mul(r_d));
            let dlam = fac.solve(&nm, &rhs);
            let ds = r_d - a.transpose() * &dlam;
            let dx = &sinv_rc - d.component_mul(&ds);
            (dx, dlam, ds)
        };
        // the last two equations hold by construction; refine the first,
        // which degrades as A D Aᵀ becomes ill-conditioned
        let zero_d = DVector::zeros(nt);
        let normal_direction = |r_c: &DVector<f64>| {
            let (mut dx, mut dlam, mut ds) = newton(&rp, &rd, r_c);
            let mut err = (&rp - a * &dx).amax();
            for _ in 0..3 {
                let e = &rp - a * &dx;
                let (cx, cl, cs) = newton(&e, &zero_d, &zero_d);
                let (nx, nl, ns) = (&dx + &cx, &dlam + &cl, &ds + &cs);
                let next = (&rp - a * &nx).amax();
                if !(next < 0.5 * err) {
                    break;
                }
                (dx, dlam, ds, err) = (nx, nl, ns, next);
            }
            (dx, dlam, ds, err)
        };
        // When the normal equations have lost the primal equation, solve the
        // symmetric augmented system in u = D^{-1/2} dx instead:
        // [−I, (A D^{1/2})ᵀ; A D^{1/2}, 0] [u; dλ] = [D^{1/2}(r_d − r_c/x); r_p].
        let sqrt_d = d.map(f64::sqrt);
        let augmented = std::cell::OnceCell::new();
        let augmented_direction = |r_c: &DVector<f64>| {
            let lu = augmented.get_or_init(|| {
                let mut ad = a.clone();
                for (j, mut col) in ad.column_iter_mut().enumerate() {
                    col *= sqrt_d[j];
                }
                let mut kkt = DMatrix::zeros(nt + m, nt + m);
                kkt.view_mut((0, 0), (nt, nt)).fill_with_identity();
                kkt.view_mut((0, 0), (nt, nt)).neg_mut();
                kkt.view_mut((0, nt), (nt, m)).copy_from(&ad.transpose());
                kkt.view_mut((nt, 0), (m, nt)).copy_from(&ad);
                kkt.lu()
            });
            let mut rhs = DVector::zeros(nt + m);
            rhs.rows_mut(0, nt).copy_from(&(&rd - r_c.component_div(&x)).component_mul(&sqrt_d));
            rhs.rows_mut(nt, m).copy_from(&rp);
            let sol = lu.solve(&rhs)?;
            let dx = sol.rows(0, nt).component_mul(&sqrt_d);
            let dlam = sol.rows(nt, m).into_owned();
            let ds = (r_c - s.component_mul(&dx)).component_div(&x);
            let err = (&rp - a * &dx).amax();
            Some((dx, dlam, ds, err))
        };
        let direction = |r_c: &DVector<f64>| {
            let (dx, dlam, ds, err) = normal_direction(r_c);
            if !use_augmented || err <= 0.1 * rp.amax() + 1e-14 * bnorm {
                return (dx, dlam, ds);
            }
            match augmented_direction(r_c) {
                Some((ax, al, as_, aerr)) if aerr < err => (ax, al, as_),
                _ => (dx, dlam, ds),
            }
        };

        // predictor
        let rc_aff = -x.component_mul(&s);
        let (dx_a, _, ds_a) = direction(&rc_aff);
        let ap = step_to_boundary(&x, &dx_a);
        let ad = step_to_boundary(&s, &ds_a);
        let mu_aff = (&x + ap * &dx_a).dot(&(&s + ad * &ds_a)) / nt as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // corrector
        let rc = DVector::from_element(nt, sigma * mu) - x.component_mul(&s) - dx_a.component_mul(&ds_a);
        let (dx, dlam, ds) = direction(&rc);
        let eta = (1.0 - mu).clamp(0.9, 0.995);
        let ap = (eta * step_to_boundary(&x, &dx)).min(1.0);
        let ad = (eta * step_to_boundary(&s, &ds)).min(1.0);
        x += ap * dx;
        lam += ad * dlam;
        s += ad * ds;
    }

    settle(best, LpStatus::IterationLimit, opts.max_iters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], aub: &[&[f64]], bub: &[f64], aeq: &[&[f64]], beq: &[f64]) -> LpStandardForm {
        let n = c.len();
        let rows = |r: &[&[f64]]| {
            DMatrix::from_row_iterator(r.len(), n, r.iter().flat_map(|row| row.iter().copied()))
        };
        LpStandardForm::new(
            DVector::from_column_slice(c),
            rows(aub),
            DVector::from_column_slice(bub),
            rows(aeq),
            DVector::from_column_slice(beq),
        )
        .unwrap()
    }

    #[test]
    fn textbook_inequality_lp() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → (2, 6), value 36
        let p = lp(&[-3.0, -5.0], &[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 2.0]], &[4.0, 12.0, 18.0], &[], &[]);
        let s = solve(&p, &LpOptions::default());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 36.0).abs() < 1e-7, "{}", s.objective);
        assert!((s.z[0] - 2.0).abs() < 1e-6 && (s.z[1] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn equality_lp() {
        // min x + 2y + 3z s.t. x + y + z = 1 → x = 1
        let p = lp(&[1.0, 2.0, 3.0], &[], &[], &[&[1.0, 1.0, 1.0]], &[1.0]);
        let s = solve(&p, &LpOptions::default());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-8);
        assert!(p.max_violation(&s.z) < 1e-9);
        // duality: bᵀy = cᵀz
        assert!((s.y_eq[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let p = lp(&[1.0, 1.0], &[], &[], &[&[1.0, -1.0]], &[0.0]);
        let s = solve(&p, &LpOptions::default());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.z.amax() < 1e-8);
    }

    #[test]
    fn infeasible_is_not_reported_optimal() {
        // x ≥ 0 with x = −1
        let p = lp(&[1.0], &[], &[], &[&[1.0]], &[-1.0]);
        let s = solve(&p, &LpOptions::default());
        assert_ne!(s.status, LpStatus::Optimal);
    }

    #[test]
    fn shape_errors() {
        let r = LpStandardForm::new(
            DVector::from_element(2, 1.0),
            DMatrix::zeros(1, 3),
            DVector::zeros(1),
            DMatrix::zeros(0, 2),
            DVector::zeros(0),
        );
        assert!(r.is_err());
    }
}
