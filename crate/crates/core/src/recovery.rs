//! Recovery of a grid spike train from `y = K x + n` by
//!
//! ```text
//!     minimize ‖x‖₁   subject to   ‖y − K x‖₁ ≤ δ
//! ```
//!
//! posed as a linear program, plus the unregularized least-squares baseline
//! and support/error metrics.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LpOptions, LpStandardForm, LpStatus};
use crate::signal::{condition_number, SampleGrid, SpikeTrain};

/// One recovery instance.
#[derive(Debug, Clone)]
pub struct L1Problem {
    pub matrix: DMatrix<f64>,
    pub y: DVector<f64>,
    /// ℓ1 noise budget.
    pub delta: f64,
}

impl L1Problem {
    pub fn new(matrix: DMatrix<f64>, y: DVector<f64>, delta: f64) -> Result<Self> {
        if matrix.nrows() != y.len() {
            return Err(Error::Shape(format!("matrix has {} rows but y has {}", matrix.nrows(), y.len())));
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!("delta must be nonnegative, got {delta}")));
        }
        Ok(Self { matrix, y, delta })
    }

    pub fn residual_l1(&self, x: &DVector<f64>) -> f64 {
        (&self.y - &self.matrix * x).lp_norm(1)
    }
}

pub type SolveOptions = LpOptions;

pub type SolveStatus = LpStatus;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L1Solution {
    pub x_hat: Vec<f64>,
    /// `‖x̂‖₁`
    pub objective: f64,
    /// `‖y − K x̂‖₁`
    pub residual_l1: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Objective of the raw interior-point iterate, before support polishing.
    pub lp_objective: f64,
    /// Whether the returned point came from the support-polishing step.
    pub polished: bool,
}

/// Encodes the recovery program as an LP over `z ≥ 0`.
///
/// `δ > 0`: `z = (x⁺, x⁻, e⁺, e⁻)` with `K(x⁺ − x⁻) + e⁺ − e⁻ = y` and
/// `1ᵀ(e⁺ + e⁻) ≤ δ`, so `e = y − Kx` is split into its signed parts.
/// `δ = 0`: `z = (x⁺, x⁻)` with `K(x⁺ − x⁻) = y`.
pub fn encode_lp(problem: &L1Problem) -> LpStandardForm {
    let (m, n) = problem.matrix.shape();
    let k = &problem.matrix;
    let noisy = problem.delta > 0.0;
    let nv = if noisy { 2 * n + 2 * m } else { 2 * n };
    let mut a_eq = DMatrix::zeros(m, nv);
    a_eq.view_mut((0, 0), (m, n)).copy_from(k);
    a_eq.view_mut((0, n), (m, n)).copy_from(&(-k));
    let mut cost = DVector::zeros(nv);
    cost.rows_mut(0, 2 * n).fill(1.0);
    let (a_ub, b_ub) = if noisy {
        let mut row = DMatrix::zeros(1, nv);
        for i in 0..m {
            a_eq[(i, 2 * n + i)] = 1.0;
            a_eq[(i, 2 * n + m + i)] = -1.0;
            row[(0, 2 * n + i)] = 1.0;
            row[(0, 2 * n + m + i)] = 1.0;
        }
        (row, DVector::from_element(1, problem.delta))
    } else {
        (DMatrix::zeros(0, nv), DVector::zeros(0))
    };
    LpStandardForm::new(cost, a_ub, b_ub, a_eq, problem.y.clone()).expect("shapes are consistent by construction")
}

/// Maps an LP point back to `x = x⁺ − x⁻`.
pub fn decode_lp(problem: &L1Problem, z: &DVector<f64>) -> DVector<f64> {
    let n = problem.matrix.ncols();
    z.rows(0, n) - z.rows(n, n)
}

/// Entries below this fraction of `max |x̂|` are treated as off-support when
/// polishing.
const POLISH_SUPPORT: f64 = 1e-7;

/// Solves the recovery program.
///
/// After the interior-point solve, the iterate is polished on its detected
/// support: for `δ = 0` the support columns are fit by least squares and the
/// result is kept if it stays feasible and is no worse in ℓ1; for `δ > 0`
/// the point is pulled toward the support least-squares fit just far enough
/// to satisfy the budget exactly.
pub fn solve_l1(problem: &L1Problem, options: &SolveOptions) -> L1Solution {
    let lp = encode_lp(problem);
    let sol = lp::solve(&lp, options);
    let mut x = decode_lp(problem, &sol.z);
    let lp_objective = x.lp_norm(1);
    let mut polished = false;

    if sol.status == LpStatus::Optimal {
        let ynorm = 1.0 + problem.y.lp_norm(1);
        let feas_slack = options.feas_tol * ynorm;
        if let Some(xp) = support_least_squares(problem, &x) {
            let r_p = problem.residual_l1(&xp);
            let obj_p = xp.lp_norm(1);
            let no_worse = obj_p <= lp_objective + options.opt_tol * (1.0 + lp_objective);
            if r_p <= problem.delta + feas_slack && no_worse && (problem.delta == 0.0 || r_p <= problem.delta) {
                x = xp;
                polished = true;
            } else if problem.delta > 0.0 {
                let r_x = problem.residual_l1(&x);
                if r_x > problem.delta && r_p < problem.delta {
                    // residual is convex along the segment
                    let t = (r_x - problem.delta) / (r_x - r_p);
                    x = &x * (1.0 - t) + &xp * t;
                    polished = true;
                }
            }
        }
    }

    let residual_l1 = problem.residual_l1(&x);
    L1Solution {
        objective: x.lp_norm(1),
        x_hat: x.iter().copied().collect(),
        residual_l1,
        status: sol.status,
        iterations: sol.iterations,
        lp_objective,
        polished,
    }
}

/// Least-squares fit of `y` on the columns where `|x| > 1e−7 max|x|`.
fn support_least_squares(problem: &L1Problem, x: &DVector<f64>) -> Option<DVector<f64>> {
    let (m, n) = problem.matrix.shape();
    let cut = x.amax() * POLISH_SUPPORT;
    let support: Vec<usize> = (0..n).filter(|&i| x[i].abs() > cut).collect();
    if support.is_empty() {
        return Some(DVector::zeros(n));
    }
    if support.len() > m {
        return None;
    }
    let sub = problem.matrix.select_columns(&support);
    let svd = sub.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= smax * 1e-10 {
        return None;
    }
    let coef = svd.solve(&problem.y, 0.0).ok()?;
    let mut out = DVector::zeros(n);
    for (j, &i) in support.iter().enumerate() {
        out[i] = coef[j];
    }
    Some(out)
}

/// Solves `K x = y` by LU with partial pivoting, without regularization.
pub fn solve_least_squares(matrix: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    if !matrix.is_square() {
        return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
    }
    if matrix.nrows() != y.len() {
        return Err(Error::Shape(format!("{}x{} matrix with {} values", matrix.nrows(), matrix.ncols(), y.len())));
    }
    match matrix.clone().lu().solve(y) {
        Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x),
        _ => Err(Error::Singular { condition: condition_number(matrix).unwrap_or(f64::INFINITY) }),
    }
}

/// Default detection threshold `1e−4 · max |x̂|`.
pub fn default_threshold(x_hat: &[f64]) -> f64 {
    1e-4 * x_hat.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Spikes at `t = k/N` for every `|x̂[k]| > threshold`.
pub fn extract_support(x_hat: &[f64], grid: &SampleGrid, threshold: f64) -> Result<SpikeTrain> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {threshold}")));
    }
    if x_hat.len() != grid.len() {
        return Err(Error::Shape(format!("{} entries for a {}-point grid", x_hat.len(), grid.len())));
    }
    let pairs = x_hat
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > threshold)
        .map(|(i, &v)| (grid.t(i), v))
        .collect();
    SpikeTrain::from_pairs(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMetrics {
    pub l1_error: f64,
    pub exact_support: bool,
    pub support_precision: f64,
    pub support_recall: f64,
}

/// ℓ1 error and support agreement of `x_hat` against `x_true` on a shared
/// grid, both supports taken as `{k : |x[k]| > threshold}`.
pub fn recovery_metrics(x_hat: &[f64], x_true: &[f64], threshold: f64) -> Result<RecoveryMetrics> {
    if x_hat.len() != x_true.len() {
        return Err(Error::Shape(format!("{} vs {} entries", x_hat.len(), x_true.len())));
    }
    let l1_error = x_hat.iter().zip(x_true).map(|(a, b)| (a - b).abs()).sum();
    let supp = |x: &[f64]| -> BTreeSet<usize> { (0..x.len()).filter(|&i| x[i].abs() > threshold).collect() };
    let found = supp(x_hat);
    let truth = supp(x_true);
    let hits = found.intersection(&truth).count() as f64;
    let ratio = |den: usize| if den == 0 { 1.0 } else { hits / den as f64 };
    Ok(RecoveryMetrics {
        l1_error,
        exact_support: found == truth,
        support_precision: ratio(found.len()),
        support_recall: ratio(truth.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::signal::{convolution_matrix, sample_signal};

    #[test]
    fn encode_counts() {
        let p = L1Problem::new(DMatrix::identity(4, 4), DVector::zeros(4), 0.5).unwrap();
        let lp = encode_lp(&p);
        assert_eq!((lp.num_vars(), lp.num_ub(), lp.num_eq()), (16, 1, 4));
        let p0 = L1Problem::new(DMatrix::identity(4, 4), DVector::zeros(4), 0.0).unwrap();
        let lp0 = encode_lp(&p0);
        assert_eq!((lp0.num_vars(), lp0.num_ub(), lp0.num_eq()), (8, 0, 4));
    }

    #[test]
    fn zero_data_zero_solution() {
        let p = L1Problem::new(DMatrix::identity(5, 5), DVector::zeros(5), 0.0).unwrap();
        let s = solve_l1(&p, &SolveOptions::default());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.objective < 1e-12);
    }

    #[test]
    fn single_gaussian_spike_exact() {
        let k = KernelSpec::gaussian();
        let grid = SampleGrid::new(100, -1.0, 1.0).unwrap();
        let x = SpikeTrain::new(vec![0.0], vec![1.0]).unwrap();
        let y = sample_signal(&k, 0.1, &x, &grid).unwrap();
        let m = convolution_matrix(&k, 0.1, &grid).unwrap();
        let p = L1Problem::new(m, y.as_vector(), 0.0).unwrap();
        let s = solve_l1(&p, &SolveOptions::default());
        assert_eq!(s.status, LpStatus::Optimal);
        let truth = x.to_grid_vector(&grid).unwrap();
        let err: f64 = s.x_hat.iter().zip(truth.iter()).map(|(a, b)| (a - b).abs()).sum();
        assert!(err <= 1e-6, "l1 error {err}");
        let found = extract_support(&s.x_hat, &grid, 1e-4).unwrap();
        assert_eq!(found.positions(), x.positions());
    }

    #[test]
    fn least_squares_examples() {
        let y = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        assert_eq!(solve_least_squares(&DMatrix::identity(3, 3), &y).unwrap(), y);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let x = solve_least_squares(&m, &DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15 && (x[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            solve_least_squares(&DMatrix::zeros(2, 2), &DVector::zeros(2)),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn support_and_metrics_examples() {
        let grid = SampleGrid::new(100, 0.0, 1.0).unwrap();
        assert!(extract_support(&vec![0.0; 101], &grid, 1e-4).unwrap().is_empty());
        let mut v = vec![0.0; 101];
        v[50] = 1.0;
        let s = extract_support(&v, &grid, 1e-4).unwrap();
        assert_eq!((s.positions(), s.amplitudes()), (&[0.5][..], &[1.0][..]));

        let m = recovery_metrics(&v, &v, 1e-4).unwrap();
        assert_eq!((m.l1_error, m.exact_support), (0.0, true));
        let mut noisy = v.clone();
        noisy[3] = 1e-9;
        let m = recovery_metrics(&noisy, &v, 1e-4).unwrap();
        assert!(m.exact_support);
        assert!((m.l1_error - 1e-9).abs() < 1e-24);
        let mut truth = v.clone();
        truth[10] = -0.7;
        let m = recovery_metrics(&v, &truth, 1e-4).unwrap();
        assert!(!m.exact_support);
        assert!(m.support_recall < 1.0);
        assert_eq!(m.support_precision, 1.0);
    }
}
