use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{csv_columns, random_instance, table_csv, Artifacts, ExperimentConfig, Range, RunError};
use crate::exec;
use crate::kernel::KernelSpec;
use crate::plot::{Plot, Series, Style};
use crate::recovery::{recovery_metrics, solve_l1, L1Problem, SolveOptions, SolveStatus};
use crate::signal::{convolution_matrix, sample_signal, SampleGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub nu: f64,
    pub success_rate: f64,
    pub mean_l1_error: f64,
    pub trials: usize,
    /// Trials whose LP did not reach optimality (counted as failures).
    pub solver_failures: usize,
    /// Mean number of spikes actually placed.
    pub mean_spikes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kernel: String,
    pub rows: Vec<SweepRow>,
    /// Smallest swept ν from which every larger swept ν also succeeded in
    /// all trials.
    pub transition_nu: Option<f64>,
}

/// Smallest ν with success rate 1 such that all larger ν also have rate 1.
pub fn transition_nu(rows: &[SweepRow]) -> Option<f64> {
    let mut out = None;
    for r in rows.iter().rev() {
        if r.success_rate < 1.0 {
            break;
        }
        out = Some(r.nu);
    }
    out
}

struct Trial {
    success: bool,
    l1_error: f64,
    solver_ok: bool,
    spikes: usize,
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    kernel: &KernelSpec,
    cfg: &ExperimentConfig,
    grid: &SampleGrid,
    matrix: &DMatrix<f64>,
    nu: f64,
    seed: u64,
) -> Result<Trial, RunError> {
    let spikes = random_instance(cfg, cfg.sweep_spikes(), nu, cfg.amplitude_std.unwrap_or(1.0), seed)?;
    let x_true = spikes.to_grid_vector(grid)?;
    let y = sample_signal(kernel, cfg.sigma, &spikes, grid)?;
    let problem = L1Problem::new(matrix.clone(), y.as_vector(), 0.0)?;
    let sol = solve_l1(&problem, &SolveOptions::default());
    let solver_ok = sol.status == SolveStatus::Optimal;
    let m = recovery_metrics(&sol.x_hat, x_true.as_slice(), cfg.detection_threshold(&sol.x_hat))?;
    Ok(Trial { success: solver_ok && m.exact_support, l1_error: m.l1_error, solver_ok, spikes: spikes.len() })
}

/// Success rate of noise-free recovery as a function of the separation ν.
///
/// For each ν, `trials_per_point` random supports (positions on the interval
/// at `support_step`, gap at least `νσ`, drawn until `spikes` are placed or
/// the interval is full) with `N(0, amplitude_std²)`
/// amplitudes are sampled without noise and recovered with `δ = 0`. A trial
/// succeeds when the detected support equals the true one. Default ν range:
/// 0.8–1.5 (Gaussian) or 0.3–0.8 (Cauchy), step 0.05.
pub fn run_sweep_nu(cfg: &ExperimentConfig) -> Result<(SweepResult, Artifacts), RunError> {
    cfg.validate()?;
    let kernel = cfg.kernel_or("gaussian")?;
    let range = cfg.nu_range.unwrap_or(match kernel.name().as_str() {
        "cauchy" => Range::new(0.3, 0.8, 0.05),
        _ => Range::new(0.8, 1.5, 0.05),
    });
    let nus = range.values()?;
    let grid = SampleGrid::new(cfg.n_grid, cfg.interval[0], cfg.interval[1])?;
    let matrix = convolution_matrix(&kernel, cfg.sigma, &grid)?;
    let trials = cfg.trials_per_point;

    let outcomes = exec::map_indexed(cfg.exec, nus.len() * trials, |i| {
        let nu = nus[i / trials];
        run_trial(&kernel, cfg, &grid, &matrix, nu, cfg.seed.wrapping_add(i as u64))
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;

    let rows: Vec<SweepRow> = nus
        .iter()
        .zip(outcomes.chunks(trials))
        .map(|(&nu, ts)| {
            let n = ts.len() as f64;
            SweepRow {
                nu,
                success_rate: ts.iter().filter(|t| t.success).count() as f64 / n,
                mean_l1_error: ts.iter().map(|t| t.l1_error).sum::<f64>() / n,
                trials: ts.len(),
                solver_failures: ts.iter().filter(|t| !t.solver_ok).count(),
                mean_spikes: ts.iter().map(|t| t.spikes as f64).sum::<f64>() / n,
            }
        })
        .collect();
    let result = SweepResult { kernel: kernel.name(), transition_nu: transition_nu(&rows), rows };

    let table: Vec<Vec<f64>> = result
        .rows
        .iter()
        .map(|r| {
            vec![r.nu, r.success_rate, r.mean_l1_error, r.trials as f64, r.solver_failures as f64, r.mean_spikes]
        })
        .collect();
    let csv = table_csv(
        &["nu", "success_rate", "mean_l1_error", "trials", "solver_failures", "mean_spikes"],
        &table,
    )?;
    let cols = csv_columns(&csv, &["nu", "success_rate"])?;
    let svg = Plot::new(format!("Support recovery, {} kernel", result.kernel), "nu", "success rate")
        .with(Series::new(result.kernel.clone(), cols[0].iter().copied().zip(cols[1].iter().copied()).collect(), Style::Step))
        .to_svg();
    let metrics = json!({
        "experiment": "sweep_nu",
        "kernel": result.kernel,
        "sigma": cfg.sigma,
        "n_grid": cfg.n_grid,
        "interval": cfg.interval,
        "spikes_per_trial": cfg.spikes.map_or(json!("fill"), |n| json!(n)),
        "support_step": cfg.support_step_or_default(),
        "trials_per_point": trials,
        "seed": cfg.seed,
        "threshold_fraction": cfg.threshold_fraction(),
        "solver": SolveOptions::default(),
        "transition_nu": result.transition_nu,
        "rows": result.rows,
    });
    Ok((result.clone(), Artifacts { csv, metrics, svg, extra: Vec::new() }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(nu: f64, rate: f64) -> SweepRow {
        SweepRow { nu, success_rate: rate, mean_l1_error: 0.0, trials: 10, solver_failures: 0, mean_spikes: 5.0 }
    }

    #[test]
    fn transition() {
        let rows = [row(0.8, 0.2), row(0.9, 1.0), row(1.0, 0.9), row(1.1, 1.0), row(1.2, 1.0)];
        assert_eq!(transition_nu(&rows), Some(1.1));
        assert_eq!(transition_nu(&rows[..3]), None);
        assert_eq!(transition_nu(&[]), None);
    }
}
