//! Reference computations shared by the oracle tests and the acceptance run.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pulse_core::certificate::theoretical_bounds_2d;
use pulse_core::kernel::Admissibility2dReport;
use pulse_core::lp::LpStandardForm;

/// Minimum of `cᵀz` over all basic feasible points, by brute force over
/// every choice of `n` active constraints. `None` when nothing is feasible.
pub fn vertex_enumeration(lp: &LpStandardForm) -> Option<f64> {
    let n = lp.num_vars();
    // candidate active rows: equalities always, then inequalities and z_i = 0
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..lp.num_ub() {
        rows.push((lp.a_ub.row(i).iter().copied().collect(), lp.b_ub[i]));
    }
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push((e, 0.0));
    }
    let need = n - lp.num_eq();
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..need).collect();
    loop {
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for i in 0..lp.num_eq() {
            a.row_mut(i).copy_from(&lp.a_eq.row(i));
            b[i] = lp.b_eq[i];
        }
        for (r, &p) in pick.iter().enumerate() {
            let i = lp.num_eq() + r;
            for j in 0..n {
                a[(i, j)] = rows[p].0[j];
            }
            b[i] = rows[p].1;
        }
        let lu = a.clone().full_piv_lu();
        if lu.determinant().abs() > 1e-10 {
            if let Some(z) = lu.solve(&b) {
                if lp.max_violation(&z) <= 1e-9 {
                    let obj = lp.cost.dot(&z);
                    best = Some(best.map_or(obj, |o: f64| o.min(obj)));
                }
            }
        }
        // next combination
        let mut i = need;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < rows.len() - need + i {
                pick[i] += 1;
                for j in i + 1..need {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Solves the bivariate system by eliminating the derivative blocks:
/// `S = G⁰⁰ − B D⁻¹ Bᵀ`, `a = S⁻¹ v`, `(b, c) = −D⁻¹ Bᵀ a`.
pub fn schur_solve(sys: &DMatrix<f64>, m: usize, signs: &[f64]) -> (DVector<f64>, DVector<f64>) {
    let g00 = sys.view((0, 0), (m, m)).into_owned();
    let top = sys.view((0, m), (m, 2 * m)).into_owned();
    let left = sys.view((m, 0), (2 * m, m)).into_owned();
    let d = sys.view((m, m), (2 * m, 2 * m)).into_owned();
    let d_inv = d.try_inverse().unwrap();
    let s = &g00 - &top * &d_inv * &left;
    let a = s.lu().solve(&DVector::from_column_slice(signs)).unwrap();
    let rest = -(&d_inv * &left * &a);
    (a, rest)
}

/// Central difference.
pub const H: f64 = 1e-5;

pub fn fd(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    (f(t + H) - f(t - H)) / (2.0 * H)
}

pub fn close(fd: f64, exact: f64) -> bool {
    (fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3)
}

/// Smallest ν meeting all seven bivariate conditions.
pub fn report_min_nu(report: &Admissibility2dReport) -> f64 {
    let b = theoretical_bounds_2d(report, 1.0).unwrap();
    b.nu3_thresholds.iter().fold(0.0f64, |m, &x| m.max(x)).cbrt() * (1.0 + 1e-9)
}
