use std::fs::File;

use serde_json::json;

use super::{csv_columns, round10, table_csv, Artifacts, ExperimentConfig, RunError};
use crate::certificate::{
    solve_certificate_1d, solve_certificate_2d, theoretical_bounds, theoretical_bounds_2d, verify_certificate,
    verify_certificate_2d, VerifyOptions,
};
use crate::io;
use crate::kernel::{admissibility_2d, default_admissibility};
use crate::plot::{Plot, Series, Style};
use crate::recovery::{extract_support, recovery_metrics, solve_l1, L1Problem, SolveOptions, SolveStatus};
use crate::signal::convolution_matrix;
use crate::stability::{audit_bound, l1_error_bound};

fn alternating(m: usize) -> Vec<f64> {
    (0..m).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

fn open(path: &std::path::Path) -> Result<File, RunError> {
    File::open(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

/// Solves and verifies a dual certificate (σ-normalized units).
///
/// The support comes from `support` (or `support_2d` for the tensor-product
/// kernel); without either, `spikes` points (default 5) spaced `nu`
/// (default 2) apart are used. Signs default to alternating ±1.
pub fn run_certify(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    cfg.validate()?;
    if cfg.support_2d.is_some() {
        return certify_2d(cfg);
    }
    let kernel = cfg.kernel_or("gaussian")?;
    let support = match &cfg.support {
        Some(s) => s.clone(),
        None => {
            let nu = cfg.nu.unwrap_or(2.0);
            let m = cfg.spikes_or_default();
            (0..m).map(|i| round10((i as f64 - (m as f64 - 1.0) / 2.0) * nu)).collect()
        }
    };
    if support.is_empty() {
        return Err(RunError::Config("empty support".into()));
    }
    let signs = cfg.signs.clone().unwrap_or_else(|| alternating(support.len()));
    let report = default_admissibility(&kernel)?;
    let step = cfg.probe_step.unwrap_or(1e-3);
    let extent = cfg.probe_extent.unwrap_or(5.0);
    let opts = VerifyOptions::new(step, extent, report.epsilon, report.beta)
        .with_exclusion(cfg.exclusion_radius.unwrap_or(step))
        .with_mode(cfg.exec);
    let cert = solve_certificate_1d(&kernel, &support, &signs).map_err(|e| match e {
        crate::Error::Singular { .. } => RunError::Core(e),
        other => RunError::Config(other.to_string()),
    })?;
    let verification = verify_certificate(&cert, &opts).map_err(|e| RunError::Config(e.to_string()))?;
    let nu = cert.separation();
    let bounds = if nu.is_finite() && report.passed { Some(theoretical_bounds(&report, nu)?) } else { None };
    let a_inf = cert.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let b_inf = cert.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let a_min = cert.a.iter().zip(&cert.signs).map(|(a, v)| a * v).fold(f64::INFINITY, f64::min);

    let lo = support.iter().copied().fold(f64::INFINITY, f64::min) - extent;
    let hi = support.iter().copied().fold(f64::NEG_INFINITY, f64::max) + extent;
    let plot_step = 0.01;
    let n = ((hi - lo) / plot_step).round() as usize;
    let rows: Vec<Vec<f64>> = (0..=n)
        .map(|i| {
            let t = round10(lo + i as f64 * plot_step);
            vec![t, cert.eval_q(t, 0).expect("order 0")]
        })
        .collect();
    let csv = table_csv(&["t", "q"], &rows)?;
    let cols = csv_columns(&csv, &["t", "q"])?;
    let svg = Plot::new(format!("Certificate, {} kernel", kernel.name()), "t / sigma", "q(t)")
        .with(Series::new("q", cols[0].iter().copied().zip(cols[1].iter().copied()).collect(), Style::Line))
        .to_svg();
    let metrics = json!({
        "experiment": "certify",
        "kernel": kernel.name(),
        "support": cert.support,
        "signs": cert.signs,
        "a": cert.a,
        "b": cert.b,
        "separation": nu,
        "verification": verification,
        "probe": opts,
        "coefficients": { "a_inf": a_inf, "b_inf": b_inf, "min_signed_a": a_min },
        "bounds": bounds,
        "admissibility": report,
    });
    Ok(Artifacts { csv, metrics, svg, extra: Vec::new() })
}

fn certify_2d(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let kernel = cfg.kernel_or("gaussian")?.tensor()?;
    let support: Vec<(f64, f64)> = cfg.support_2d.as_ref().expect("checked").iter().map(|p| (p[0], p[1])).collect();
    if support.is_empty() {
        return Err(RunError::Config("empty support".into()));
    }
    let signs = cfg.signs.clone().unwrap_or_else(|| alternating(support.len()));
    let report = admissibility_2d(&kernel, kernel.default_epsilon(), 10.0, 0.05, cfg.exec)?;
    let step = cfg.probe_step.unwrap_or(0.02);
    let extent = cfg.probe_extent.unwrap_or(3.0);
    let opts = VerifyOptions::new(step, extent, report.epsilon, report.beta)
        .with_exclusion(cfg.exclusion_radius.unwrap_or(step))
        .with_mode(cfg.exec);
    let cert = solve_certificate_2d(&kernel, &support, &signs).map_err(|e| match e {
        crate::Error::Singular { .. } => RunError::Core(e),
        other => RunError::Config(other.to_string()),
    })?;
    let verification = verify_certificate_2d(&cert, &opts).map_err(|e| RunError::Config(e.to_string()))?;
    let mut nu = f64::INFINITY;
    for (i, p) in support.iter().enumerate() {
        for q in &support[i + 1..] {
            nu = nu.min((p.0 - q.0).abs().max((p.1 - q.1).abs()));
        }
    }
    let bounds = if nu.is_finite() && report.passed { Some(theoretical_bounds_2d(&report, nu)?) } else { None };

    // q on a coarse grid; the plot takes the row through the first spike
    let plot_step = 0.05;
    let (t_lo, t_hi, u_lo, u_hi) = support.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |b, p| (b.0.min(p.0), b.1.max(p.0), b.2.min(p.1), b.3.max(p.1)),
    );
    let nt = ((t_hi - t_lo + 2.0 * extent) / plot_step).round() as usize;
    let nu_pts = ((u_hi - u_lo + 2.0 * extent) / plot_step).round() as usize;
    let mut rows = Vec::with_capacity((nt + 1) * (nu_pts + 1));
    for i in 0..=nt {
        let t = round10(t_lo - extent + i as f64 * plot_step);
        for j in 0..=nu_pts {
            let u = round10(u_lo - extent + j as f64 * plot_step);
            rows.push(vec![t, u, cert.eval_q2(t, u, 0, 0).expect("order 0")]);
        }
    }
    let csv = table_csv(&["t", "u", "q"], &rows)?;
    let cols = csv_columns(&csv, &["t", "u", "q"])?;
    let u_row = cols[1]
        .iter()
        .copied()
        .min_by(|a, b| (a - support[0].1).abs().total_cmp(&(b - support[0].1).abs()))
        .unwrap_or(0.0);
    let slice: Vec<(f64, f64)> = (0..cols[0].len()).filter(|&k| cols[1][k] == u_row).map(|k| (cols[0][k], cols[2][k])).collect();
    let svg = Plot::new(format!("Certificate slice u = {u_row}, {} kernel", kernel.name()), "t / sigma", "q(t, u)")
        .with(Series::new("q", slice, Style::Line))
        .to_svg();
    let metrics = json!({
        "experiment": "certify",
        "kernel": kernel.name(),
        "support_2d": cert.support,
        "signs": cert.signs,
        "a": cert.a,
        "b": cert.b,
        "c": cert.c,
        "separation": nu,
        "verification": verification,
        "probe": opts,
        "bounds": bounds,
        "admissibility": report,
    });
    Ok(Artifacts { csv, metrics, svg, extra: Vec::new() })
}

/// Recovers a spike train from a signal CSV.
///
/// Reads `signal` (`k,t,y`; grid density must equal `n_grid`), solves with
/// budget `delta` (default 0) and writes the solution as `k,t,x_hat`, the
/// detected spikes as `spikes.csv`, and metrics. With `truth`, recovery
/// metrics are added; with `bound`, the ℓ1 error bound at separation `nu`
/// (or the truth's separation) and, given a truth, its audit.
pub fn run_recover(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    cfg.validate()?;
    let kernel = cfg.kernel_or("gaussian")?;
    let path = cfg.signal.as_ref().ok_or_else(|| RunError::Config("recover needs a signal file".into()))?;
    let signal = io::read_signal(open(path)?, None).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    let grid = signal.grid;
    if grid.density() != cfg.n_grid {
        return Err(RunError::Config(format!(
            "signal grid density {} does not match n_grid {}",
            grid.density(),
            cfg.n_grid
        )));
    }
    let truth = match &cfg.truth {
        Some(p) => Some(io::read_spikes(open(p)?).map_err(|e| RunError::Config(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let delta = cfg.delta.unwrap_or(0.0);
    let options = SolveOptions::default();
    let matrix = convolution_matrix(&kernel, cfg.sigma, &grid)?;
    let sol = solve_l1(&L1Problem::new(matrix, signal.as_vector(), delta)?, &options);
    if sol.status != SolveStatus::Optimal {
        return Err(RunError::Solver(format!("l1 solve ended with {:?} after {} iterations", sol.status, sol.iterations)));
    }
    let threshold = cfg.detection_threshold(&sol.x_hat);
    let detected = extract_support(&sol.x_hat, &grid, threshold)?;

    let recovery = match &truth {
        Some(t) => {
            let x_true = t.to_grid_vector(&grid).map_err(|e| RunError::Config(format!("truth: {e}")))?;
            Some(recovery_metrics(&sol.x_hat, x_true.as_slice(), threshold)?)
        }
        None => None,
    };
    let bound = if cfg.bound {
        let nu = match (cfg.nu, &truth) {
            (Some(nu), _) => nu,
            (None, Some(t)) if t.len() >= 2 => t.min_separation() / cfg.sigma,
            _ => return Err(RunError::Config("the bound needs nu or a truth file with two or more spikes".into())),
        };
        let report = default_admissibility(&kernel)?;
        let b = l1_error_bound(&report, nu, cfg.n_grid, cfg.sigma, delta)?;
        let audit = match (&recovery, b.valid) {
            (Some(r), true) => Some(audit_bound(&b, r.l1_error)?),
            _ => None,
        };
        Some(json!({ "nu": nu, "report": b, "audit": audit }))
    } else {
        None
    };

    let mut buf = Vec::new();
    io::write_solution(&mut buf, &grid, &sol.x_hat)?;
    let csv = String::from_utf8(buf).expect("utf-8");
    let cols = csv_columns(&csv, &["t", "x_hat"])?;
    let cut = threshold;
    let pts: Vec<(f64, f64)> =
        cols[0].iter().copied().zip(cols[1].iter().copied()).filter(|p| p.1.abs() > cut).collect();
    let svg = Plot::new(format!("Recovered spikes, {} kernel", kernel.name()), "t", "x_hat")
        .with(Series::new("x_hat", pts, Style::Stems))
        .to_svg();
    let mut spikes_csv = Vec::new();
    io::write_spikes(&mut spikes_csv, &detected)?;
    let metrics = json!({
        "experiment": "recover",
        "kernel": kernel.name(),
        "sigma": cfg.sigma,
        "n_grid": cfg.n_grid,
        "delta": delta,
        "status": sol.status,
        "objective": sol.objective,
        "residual_l1": sol.residual_l1,
        "iterations": sol.iterations,
        "polished": sol.polished,
        "threshold": threshold,
        "detected": detected.len(),
        "recovery": recovery,
        "bound": bound,
        "solver": options,
    });
    Ok(Artifacts { csv, metrics, svg, extra: vec![("spikes.csv".into(), String::from_utf8(spikes_csv).expect("utf-8"))] })
}
