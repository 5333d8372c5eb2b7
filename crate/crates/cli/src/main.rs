use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pulse_core::experiments::{run, ExperimentConfig, ExperimentKind, RunError};
use pulse_core::ExecMode;

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    ExperimentKind::from_name(s).ok_or_else(|| {
        let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown experiment {s:?}; expected one of {}", names.join(", "))
    })
}

fn parse_exec(s: &str) -> Result<ExecMode, String> {
    match s {
        "sequential" => Ok(ExecMode::Sequential),
        "parallel" => Ok(ExecMode::Parallel),
        _ => Err(format!("unknown execution mode {s:?}; expected sequential or parallel")),
    }
}

/// Pulse-stream recovery experiments.
///
/// Writes results.csv, metrics.json and plot.svg to the output directory.
/// Command-line flags override the corresponding config fields.
#[derive(Parser, Debug)]
#[command(name = "pulse-recover", version)]
struct Cli {
    /// sweep_nu, cond_number, noisy_demo, ls_vs_l1, certify, recover or instability_demo
    #[arg(value_parser = parse_kind)]
    experiment: ExperimentKind,
    /// JSON config file; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: config output_dir, else out/<experiment>]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Noise level ‖e‖₁ (noisy_demo, recover).
    #[arg(long)]
    delta: Option<f64>,
    /// Noise level as an SNR in dB (noisy_demo).
    #[arg(long)]
    snr: Option<f64>,
    /// Sampled signal CSV for recover.
    #[arg(long)]
    signal: Option<PathBuf>,
    /// Ground-truth spikes CSV for recover.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Report the ℓ1 error bound (recover).
    #[arg(long)]
    bound: bool,
    /// sequential or parallel
    #[arg(long, value_parser = parse_exec)]
    exec: Option<ExecMode>,
}

impl Cli {
    fn config(&self) -> Result<ExperimentConfig, RunError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = &self.out {
            cfg.output_dir = Some(p.clone());
        }
        if let Some(k) = &self.kernel {
            cfg.kernel = Some(k.clone());
        }
        if let Some(t) = self.trials {
            cfg.trials_per_point = t;
        }
        if let Some(d) = self.delta {
            cfg.delta = Some(d);
            cfg.snr = None;
        }
        if let Some(s) = self.snr {
            cfg.snr = Some(s);
            cfg.delta = None;
        }
        if let Some(p) = &self.signal {
            cfg.signal = Some(p.clone());
        }
        if let Some(p) = &self.truth {
            cfg.truth = Some(p.clone());
        }
        cfg.bound |= self.bound;
        if let Some(e) = self.exec {
            cfg.exec = e;
        }
        Ok(cfg)
    }

    fn execute(&self) -> Result<PathBuf, RunError> {
        let cfg = self.config()?;
        let artifacts = run(self.experiment, &cfg)?;
        let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(self.experiment.name()));
        artifacts.write_to(&dir)?;
        Ok(dir)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.execute() {
        Ok(dir) => {
            println!("wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("pulse-recover: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
