use nalgebra::DMatrix;
use serde_json::json;

use super::{csv_columns, random_instance, round10, table_csv, Artifacts, ExperimentConfig, Range, RunError};
use crate::exec;
use crate::io;
use crate::kernel::default_admissibility;
use crate::plot::{Plot, Series, Style};
use crate::recovery::{recovery_metrics, solve_l1, solve_least_squares, L1Problem, SolveOptions, SolveStatus};
use crate::signal::{add_noise, condition_number, convolution_matrix, sample_signal, NoiseSpec, SampleGrid};
use crate::stability::{audit_bound, l1_error_bound};
use crate::Error;

/// Seed offset for noise draws.
const NOISE_STREAM: u64 = 0x0A11_CE5E_ED00_0001;

fn zip(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().copied().zip(b.iter().copied()).collect()
}

/// Nonzero entries of `x` above `frac · max |x|`, as plot points.
fn spikes_of(t: &[f64], x: &[f64], frac: f64) -> Vec<(f64, f64)> {
    let cut = frac * x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    zip(t, x).into_iter().filter(|p| p.1 != 0.0 && p.1.abs() > cut).collect()
}

/// Condition number of the convolution matrix versus the sampling step.
///
/// For each `dt` in `dt_range` (default 0.01 to 0.2 by 0.01) the samples are
/// `a + i·dt` on the interval and the matrix entries `K((i − j)dt/σ)`.
pub fn run_cond_number(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    cfg.validate()?;
    let kernel = cfg.kernel_or("gaussian")?;
    let dts = cfg.dt_range.unwrap_or(Range::new(0.01, 0.2, 0.01)).values()?;
    let (a, b) = (cfg.interval[0], cfg.interval[1]);
    let results = exec::map_slice(cfg.exec, &dts, |&dt| -> Result<(f64, usize), Error> {
        let n = ((b - a) / dt + 1e-9).floor() as usize + 1;
        let diag: Vec<f64> = (0..n).map(|d| kernel.value(d as f64 * dt / cfg.sigma, 0)).collect();
        let m = DMatrix::from_fn(n, n, |i, j| diag[i.abs_diff(j)]);
        Ok((condition_number(&m)?, n))
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<f64>> = dts.iter().zip(&results).map(|(&dt, &(c, n))| vec![dt, c, n as f64]).collect();
    let csv = table_csv(&["dt", "cond", "size"], &rows)?;
    let cols = csv_columns(&csv, &["dt", "cond"])?;
    let svg = Plot::new(format!("Condition number, {} kernel, sigma = {}", kernel.name(), cfg.sigma), "dt", "cond")
        .log_y()
        .with(Series::new("cond", zip(&cols[0], &cols[1]), Style::Line))
        .to_svg();
    let metrics = json!({
        "experiment": "cond_number",
        "kernel": kernel.name(),
        "sigma": cfg.sigma,
        "interval": cfg.interval,
        "rows": dts.iter().zip(&results).map(|(dt, (c, n))| json!({"dt": dt, "cond": c, "size": n})).collect::<Vec<_>>(),
    });
    Ok(Artifacts { csv, metrics, svg, extra: Vec::new() })
}

/// ℓ1 recovery against direct inversion on one noise-free instance
/// (default ν = 1.2).
pub fn run_ls_vs_l1(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    cfg.validate()?;
    let kernel = cfg.kernel_or("gaussian")?;
    let nu = cfg.nu.unwrap_or(1.2);
    let grid = SampleGrid::new(cfg.n_grid, cfg.interval[0], cfg.interval[1])?;
    let spikes = random_instance(cfg, cfg.spikes_or_default(), nu, cfg.amplitude_std.unwrap_or(1.0), cfg.seed)?;
    let x_true = spikes.to_grid_vector(&grid)?;
    let y = sample_signal(&kernel, cfg.sigma, &spikes, &grid)?;
    let matrix = convolution_matrix(&kernel, cfg.sigma, &grid)?;
    let cond = condition_number(&matrix)?;

    let sol = solve_l1(&L1Problem::new(matrix.clone(), y.as_vector(), 0.0)?, &SolveOptions::default());
    if sol.status != SolveStatus::Optimal {
        return Err(RunError::Solver(format!("l1 solve ended with {:?}", sol.status)));
    }
    let l1 = recovery_metrics(&sol.x_hat, x_true.as_slice(), cfg.detection_threshold(&sol.x_hat))?;
    let (x_ls, ls_error) = match solve_least_squares(&matrix, &y.as_vector()) {
        Ok(x) => {
            let e = (&x - &x_true).lp_norm(1);
            (x.iter().copied().collect::<Vec<_>>(), e)
        }
        Err(Error::Singular { .. }) => (vec![f64::NAN; grid.len()], f64::INFINITY),
        Err(e) => return Err(e.into()),
    };

    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|i| vec![grid.k(i) as f64, grid.t(i), x_true[i], sol.x_hat[i], x_ls[i]])
        .collect();
    let csv = table_csv(&["k", "t", "x_true", "x_l1", "x_ls"], &rows)?;
    let cols = csv_columns(&csv, &["t", "x_true", "x_l1", "x_ls"])?;
    let svg = Plot::new("l1 recovery vs least squares", "t", "amplitude")
        .with(Series::new("least squares", zip(&cols[0], &cols[3]), Style::Line))
        .with(Series::new("true", spikes_of(&cols[0], &cols[1], 0.0), Style::Stems))
        .with(Series::new("l1", spikes_of(&cols[0], &cols[2], cfg.threshold_fraction()), Style::Markers))
        .to_svg();
    let metrics = json!({
        "experiment": "ls_vs_l1",
        "kernel": kernel.name(),
        "sigma": cfg.sigma,
        "n_grid": cfg.n_grid,
        "nu": nu,
        "seed": cfg.seed,
        "condition_number": cond,
        "spikes": spikes.len(),
        "l1": { "l1_error": l1.l1_error, "exact_support": l1.exact_support, "iterations": sol.iterations, "polished": sol.polished },
        "ls": { "l1_error": ls_error },
        "error_ratio": ls_error / l1.l1_error.max(f64::MIN_POSITIVE),
        "solver": SolveOptions::default(),
    });
    Ok(Artifacts { csv, metrics, svg, extra: Vec::new() })
}

/// Noisy recovery on one instance at several noise levels.
///
/// Defaults: Cauchy kernel, ν = 0.7, amplitude std 4, noise budgets
/// δ ∈ {20, 60}. A single `delta` or `snr` in the config replaces the
/// levels. Every level uses the same noise direction; the program is solved
/// with `δ` equal to the realized `‖e‖₁`.
pub fn run_noisy_demo(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    cfg.validate()?;
    let kernel = cfg.kernel_or("cauchy")?;
    let nu = cfg.nu.unwrap_or(0.7);
    let noise_seed = cfg.seed ^ NOISE_STREAM;
    let specs: Vec<(String, NoiseSpec)> = match (cfg.snr, cfg.delta) {
        (Some(snr), _) => vec![(format!("snr_{snr}"), NoiseSpec::SnrDb { level: snr, seed: noise_seed })],
        (None, Some(d)) => vec![(format!("delta_{d}"), NoiseSpec::L1Budget { level: d, seed: noise_seed })],
        (None, None) => cfg
            .delta_levels
            .clone()
            .unwrap_or_else(|| vec![20.0, 60.0])
            .into_iter()
            .map(|d| (format!("delta_{d}"), NoiseSpec::L1Budget { level: d, seed: noise_seed }))
            .collect(),
    };
    if specs.is_empty() {
        return Err(RunError::Config("no noise levels".into()));
    }
    let grid = SampleGrid::new(cfg.n_grid, cfg.interval[0], cfg.interval[1])?;
    let spikes = random_instance(cfg, cfg.spikes_or_default(), nu, cfg.amplitude_std.unwrap_or(4.0), cfg.seed)?;
    let x_true = spikes.to_grid_vector(&grid)?;
    let y = sample_signal(&kernel, cfg.sigma, &spikes, &grid)?;
    let matrix = convolution_matrix(&kernel, cfg.sigma, &grid)?;
    let nu_actual = if spikes.len() >= 2 { round10(spikes.min_separation() / cfg.sigma) } else { nu };
    let admissibility = default_admissibility(&kernel)?;

    let mut columns: Vec<Vec<f64>> = vec![
        (0..grid.len()).map(|i| grid.k(i) as f64).collect(),
        grid.times(),
        y.values.clone(),
        x_true.iter().copied().collect(),
    ];
    let mut header: Vec<String> = ["k", "t", "y_clean", "x_true"].map(String::from).to_vec();
    let mut levels = Vec::new();
    let mut extra = Vec::new();
    for (label, spec) in &specs {
        let noisy = add_noise(&y, spec)?;
        let delta = noisy.achieved_delta;
        let sol = solve_l1(&L1Problem::new(matrix.clone(), noisy.noisy.as_vector(), delta)?, &SolveOptions::default());
        if sol.status != SolveStatus::Optimal {
            return Err(RunError::Solver(format!("{label}: l1 solve ended with {:?}", sol.status)));
        }
        let m = recovery_metrics(&sol.x_hat, x_true.as_slice(), cfg.detection_threshold(&sol.x_hat))?;
        let bound = l1_error_bound(&admissibility, nu_actual, cfg.n_grid, cfg.sigma, delta)?;
        let audit = if bound.valid { Some(audit_bound(&bound, m.l1_error)?) } else { None };
        levels.push(json!({
            "label": label,
            "noise": spec,
            "achieved_delta": delta,
            "achieved_snr_db": noisy.achieved_snr_db,
            "objective": sol.objective,
            "residual_l1": sol.residual_l1,
            "iterations": sol.iterations,
            "metrics": m,
            "bound": bound,
            "audit": audit,
        }));
        let mut buf = Vec::new();
        io::write_signal(&mut buf, &noisy.noisy)?;
        extra.push((format!("signal_{label}.csv"), String::from_utf8(buf).expect("utf-8")));
        header.push(format!("y_{label}"));
        header.push(format!("x_hat_{label}"));
        columns.push(noisy.noisy.values);
        columns.push(sol.x_hat);
    }
    let mut buf = Vec::new();
    io::write_spikes(&mut buf, &spikes)?;
    extra.push(("truth.csv".into(), String::from_utf8(buf).expect("utf-8")));

    let rows: Vec<Vec<f64>> = (0..grid.len()).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv = table_csv(&header_refs, &rows)?;

    let mut plot = Plot::new(format!("Noisy recovery, {} kernel, nu = {nu}", kernel.name()), "t", "amplitude");
    let base = csv_columns(&csv, &["t", "x_true"])?;
    for (label, _) in &specs {
        let c = csv_columns(&csv, &[&format!("y_{label}"), &format!("x_hat_{label}")])?;
        plot = plot
            .with(Series::new(format!("y {label}"), zip(&base[0], &c[0]), Style::Line))
            .with(Series::new(format!("x_hat {label}"), spikes_of(&base[0], &c[1], cfg.threshold_fraction()), Style::Markers));
    }
    let svg = plot.with(Series::new("x true", spikes_of(&base[0], &base[1], 0.0), Style::Stems)).to_svg();

    let metrics = json!({
        "experiment": "noisy_demo",
        "kernel": kernel.name(),
        "sigma": cfg.sigma,
        "n_grid": cfg.n_grid,
        "nu": nu,
        "nu_realized": nu_actual,
        "seed": cfg.seed,
        "spikes": spikes.len(),
        "amplitude_std": cfg.amplitude_std.unwrap_or(4.0),
        "threshold_fraction": cfg.threshold_fraction(),
        "admissibility": admissibility,
        "levels": levels,
        "solver": SolveOptions::default(),
    });
    Ok(Artifacts { csv, metrics, svg, extra })
}

/// `max_t |K((t₀ − t)/σ) − K((t₀ + t_ε − t)/σ)|` as the offset `t_ε`
/// shrinks: two opposite pulses closer than the kernel width nearly cancel.
///
/// Defaults: `t₀ = 0`, `t_ε` from 0 to σ in steps of σ/10, grid search with
/// step `probe_step` (default 1e−5) over the interval widened by `t_ε`.
pub fn run_instability_demo(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    cfg.validate()?;
    let kernel = cfg.kernel_or("gaussian")?;
    let t0 = cfg.t0.unwrap_or(0.0);
    let range = cfg.t_epsilon_range.unwrap_or(Range::new(0.0, cfg.sigma, cfg.sigma / 10.0));
    let eps_values = range.values()?;
    let step = cfg.probe_step.unwrap_or(1e-5);
    if !(step > 0.0) {
        return Err(RunError::Config(format!("probe_step must be positive, got {step}")));
    }
    let results = exec::map_slice(cfg.exec, &eps_values, |&te| {
        let lo = cfg.interval[0].min(t0);
        let hi = cfg.interval[1].max(t0 + te);
        let n = ((hi - lo) / step).ceil() as usize + 1;
        let mut best = (0.0f64, lo);
        for i in 0..n {
            let t = lo + i as f64 * step;
            let y = kernel.value((t0 - t) / cfg.sigma, 0) - kernel.value((t0 + te - t) / cfg.sigma, 0);
            if y.abs() > best.0 {
                best = (y.abs(), t);
            }
        }
        best
    });
    let rows: Vec<Vec<f64>> = eps_values.iter().zip(&results).map(|(&te, &(m, t))| vec![te, m, t]).collect();
    let csv = table_csv(&["t_epsilon", "max_abs_y", "argmax_t"], &rows)?;
    let cols = csv_columns(&csv, &["t_epsilon", "max_abs_y"])?;
    let svg = Plot::new("Difference of two nearby pulses", "t_epsilon", "max |y|")
        .with(Series::new("max |y|", zip(&cols[0], &cols[1]), Style::Line))
        .to_svg();
    let metrics = json!({
        "experiment": "instability_demo",
        "kernel": kernel.name(),
        "sigma": cfg.sigma,
        "t0": t0,
        "probe_step": step,
        "rows": rows.iter().map(|r| json!({"t_epsilon": r[0], "max_abs_y": r[1], "argmax_t": r[2]})).collect::<Vec<_>>(),
    });
    Ok(Artifacts { csv, metrics, svg, extra: Vec::new() })
}
