//! Seeded experiment runners behind the `pulse-recover` command line.
//!
//! Each runner is a pure function of its [`ExperimentConfig`] and returns
//! [`Artifacts`]: a CSV table with a header row, a JSON metrics object and
//! an SVG plot drawn from the CSV alone. Trials use per-trial seeds
//! `seed + trial_index` and are aggregated by index, so sequential and
//! parallel runs produce identical bytes.

mod demos;
mod sweep;
mod tools;

pub use demos::{run_cond_number, run_instability_demo, run_ls_vs_l1, run_noisy_demo};
pub use sweep::{run_sweep_nu, transition_nu, SweepResult, SweepRow};
pub use tools::{run_certify, run_recover};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exec::ExecMode;
use crate::kernel::KernelSpec;
use crate::signal::{random_amplitudes, random_separated_support, SpikeTrain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SweepNu,
    CondNumber,
    NoisyDemo,
    LsVsL1,
    Certify,
    Recover,
    InstabilityDemo,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::SweepNu,
        Self::CondNumber,
        Self::NoisyDemo,
        Self::LsVsL1,
        Self::Certify,
        Self::Recover,
        Self::InstabilityDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SweepNu => "sweep_nu",
            Self::CondNumber => "cond_number",
            Self::NoisyDemo => "noisy_demo",
            Self::LsVsL1 => "ls_vs_l1",
            Self::Certify => "certify",
            Self::Recover => "recover",
            Self::InstabilityDemo => "instability_demo",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Inclusive arithmetic range `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    /// The range values, rounded to 10 decimals so that `0.8 + 3·0.1`
    /// prints as `1.1`.
    pub fn values(&self) -> Result<Vec<f64>, RunError> {
        if !(self.step > 0.0) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(RunError::Config(format!("range step must be positive: {self:?}")));
        }
        if self.stop < self.start {
            return Err(RunError::Config(format!("range stop below start: {self:?}")));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| round10(self.start + i as f64 * self.step)).collect())
    }
}

pub(crate) fn round10(v: f64) -> f64 {
    (v * 1e10).round() / 1e10
}

/// Experiment configuration, read from JSON.
///
/// The first block of fields is shared by all experiments; the rest are
/// experiment-specific and optional, with defaults documented per runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    /// `"gaussian"` or `"cauchy"`; each experiment has its own default.
    #[serde(default)]
    pub kernel: Option<String>,
    #[serde(default = "defaults::sigma")]
    pub sigma: f64,
    #[serde(default = "defaults::n_grid")]
    pub n_grid: u32,
    #[serde(default = "defaults::interval")]
    pub interval: [f64; 2],
    #[serde(default)]
    pub nu_range: Option<Range>,
    #[serde(default = "defaults::trials")]
    pub trials_per_point: usize,
    /// ℓ1 noise budget.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Target SNR in dB; used instead of `delta` for noise calibration.
    #[serde(default)]
    pub snr: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,

    /// Spikes drawn per random support (default 5).
    #[serde(default)]
    pub spikes: Option<usize>,
    #[serde(default)]
    pub amplitude_std: Option<f64>,
    /// Grid step for random support positions (default `1/n_grid`).
    #[serde(default)]
    pub support_step: Option<f64>,
    /// Detection threshold as a fraction of `max |x̂|` (default 1e−4).
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Separation for single-instance experiments, in units of σ.
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub delta_levels: Option<Vec<f64>>,
    #[serde(default)]
    pub dt_range: Option<Range>,
    #[serde(default)]
    pub t_epsilon_range: Option<Range>,
    #[serde(default)]
    pub t0: Option<f64>,
    /// Certificate support in σ units.
    #[serde(default)]
    pub support: Option<Vec<f64>>,
    #[serde(default)]
    pub support_2d: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub signs: Option<Vec<f64>>,
    #[serde(default)]
    pub probe_step: Option<f64>,
    #[serde(default)]
    pub probe_extent: Option<f64>,
    #[serde(default)]
    pub exclusion_radius: Option<f64>,
    /// Signal CSV (`k,t,y`) for `recover`.
    #[serde(default)]
    pub signal: Option<PathBuf>,
    /// Ground-truth spikes CSV (`t,c`) for `recover` metrics.
    #[serde(default)]
    pub truth: Option<PathBuf>,
    /// Include the ℓ1 error bound in `recover` metrics.
    #[serde(default)]
    pub bound: bool,
    #[serde(default)]
    pub exec: ExecMode,
}

mod defaults {
    pub fn sigma() -> f64 {
        0.1
    }
    pub fn n_grid() -> u32 {
        100
    }
    pub fn interval() -> [f64; 2] {
        [-1.0, 1.0]
    }
    pub fn trials() -> usize {
        10
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Shared checks; runners add their own.
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.n_grid == 0 {
            return bad("n_grid must be at least 1".into());
        }
        if !(self.interval[1] > self.interval[0]) {
            return bad(format!("interval must satisfy a < b, got {:?}", self.interval));
        }
        if self.trials_per_point == 0 {
            return bad("trials_per_point must be at least 1".into());
        }
        if let Some(r) = &self.nu_range {
            r.values()?;
        }
        if let Some(d) = self.delta {
            if !(d >= 0.0 && d.is_finite()) {
                return bad(format!("delta must be nonnegative, got {d}"));
            }
        }
        if self.delta.is_some() && self.snr.is_some() {
            return bad("set at most one of delta and snr".into());
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("threshold is a fraction of max |x|, got {t}"));
            }
        }
        if let Some(s) = self.amplitude_std {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("amplitude_std must be positive, got {s}"));
            }
        }
        Ok(())
    }

    pub(crate) fn kernel_or(&self, default: &str) -> Result<KernelSpec, RunError> {
        let name = self.kernel.as_deref().unwrap_or(default);
        KernelSpec::from_name(name).map_err(|e| RunError::Config(e.to_string()))
    }

    pub(crate) fn spikes_or_default(&self) -> usize {
        self.spikes.unwrap_or(5)
    }

    /// Spike target for the ν sweep: without `spikes`, positions are added
    /// until the interval is saturated.
    pub(crate) fn sweep_spikes(&self) -> usize {
        self.spikes.unwrap_or(usize::MAX)
    }

    pub(crate) fn threshold_fraction(&self) -> f64 {
        self.threshold.unwrap_or(1e-4)
    }

    /// Absolute detection threshold for `x`; positive even when `x = 0`.
    pub(crate) fn detection_threshold(&self, x: &[f64]) -> f64 {
        let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (self.threshold_fraction() * max).max(f64::MIN_POSITIVE)
    }

    pub(crate) fn support_step_or_default(&self) -> f64 {
        self.support_step.unwrap_or(1.0 / self.n_grid as f64)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl RunError {
    /// Process exit code: 2 for configuration and input problems, 3 for
    /// solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Solver(_) | RunError::Core(Error::Singular { .. }) => 3,
            _ => 2,
        }
    }
}

/// Outputs of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    /// `results.csv`
    pub csv: String,
    /// `metrics.json`
    pub metrics: serde_json::Value,
    /// `plot.svg`
    pub svg: String,
    /// Additional named files.
    pub extra: Vec<(String, String)>,
}

impl Artifacts {
    pub fn write_to(&self, dir: &Path) -> Result<(), RunError> {
        let io = |e: std::io::Error| RunError::Config(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("results.csv"), &self.csv).map_err(io)?;
        let json = serde_json::to_string_pretty(&self.metrics).map_err(Error::from)?;
        fs::write(dir.join("metrics.json"), json + "\n").map_err(io)?;
        fs::write(dir.join("plot.svg"), &self.svg).map_err(io)?;
        for (name, body) in &self.extra {
            fs::write(dir.join(name), body).map_err(io)?;
        }
        Ok(())
    }
}

/// Runs `kind` on `config`.
pub fn run(kind: ExperimentKind, config: &ExperimentConfig) -> Result<Artifacts, RunError> {
    if let Some(k) = config.experiment {
        if k != kind {
            return Err(RunError::Config(format!(
                "config is for {} but {} was requested",
                k.name(),
                kind.name()
            )));
        }
    }
    config.validate()?;
    match kind {
        ExperimentKind::SweepNu => run_sweep_nu(config).map(|(_, a)| a),
        ExperimentKind::CondNumber => run_cond_number(config),
        ExperimentKind::NoisyDemo => run_noisy_demo(config),
        ExperimentKind::LsVsL1 => run_ls_vs_l1(config),
        ExperimentKind::Certify => run_certify(config),
        ExperimentKind::Recover => run_recover(config),
        ExperimentKind::InstabilityDemo => run_instability_demo(config),
    }
}

pub(crate) fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> Result<String, RunError> {
    let mut buf = Vec::new();
    crate::io::write_table(&mut buf, header, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Parses a CSV produced by [`table_csv`] and returns the named columns.
pub(crate) fn csv_columns(csv: &str, names: &[&str]) -> Result<Vec<Vec<f64>>, RunError> {
    let (header, rows) = crate::io::read_table(csv.as_bytes())?;
    names
        .iter()
        .map(|n| {
            let j = header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| RunError::Core(Error::Shape(format!("missing column {n}"))))?;
            Ok(rows.iter().map(|r| r[j]).collect())
        })
        .collect()
}

/// Seed offset separating the amplitude stream from the support stream of
/// the same trial.
pub(crate) const AMPLITUDE_STREAM: u64 = 0x5DEE_CE66_D1CE_B00C;

/// Random spike train: up to `count` positions on the interval at
/// `support_step` with gaps of at least `νσ`, amplitudes `N(0, std²)`.
pub(crate) fn random_instance(
    cfg: &ExperimentConfig,
    count: usize,
    nu: f64,
    std: f64,
    seed: u64,
) -> Result<SpikeTrain, RunError> {
    let positions = random_separated_support(
        count,
        (cfg.interval[0], cfg.interval[1]),
        cfg.support_step_or_default(),
        nu * cfg.sigma,
        seed,
    )?;
    let amps = random_amplitudes(positions.len(), std, seed ^ AMPLITUDE_STREAM)?;
    Ok(SpikeTrain::new(positions, amps)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_values() {
        assert_eq!(Range::new(0.8, 1.5, 0.1).values().unwrap().len(), 8);
        assert_eq!(Range::new(0.8, 1.5, 0.1).values().unwrap()[3], 1.1);
        assert_eq!(Range::new(0.3, 0.8, 0.05).values().unwrap().len(), 11);
        assert!(Range::new(0.0, 1.0, 0.0).values().is_err());
        assert!(Range::new(1.0, 0.0, 0.1).values().is_err());
    }

    #[test]
    fn config_parsing() {
        let c = ExperimentConfig::from_json(r#"{"experiment":"sweep_nu","kernel":"cauchy","seed":7}"#).unwrap();
        assert_eq!(c.experiment, Some(ExperimentKind::SweepNu));
        assert_eq!((c.sigma, c.n_grid, c.trials_per_point, c.seed), (0.1, 100, 10, 7));
        assert!(ExperimentConfig::from_json(r#"{"sigmaa": 1}"#).is_err());
        let bad = ExperimentConfig { trials_per_point: 0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(RunError::Config(_))));
        let bad = ExperimentConfig { nu_range: Some(Range::new(1.0, 2.0, -0.1)), ..Default::default() };
        assert_eq!(bad.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn mismatched_experiment() {
        let c = ExperimentConfig { experiment: Some(ExperimentKind::Recover), ..Default::default() };
        assert!(matches!(run(ExperimentKind::SweepNu, &c), Err(RunError::Config(_))));
    }

    #[test]
    fn kind_names() {
        for k in ExperimentKind::ALL {
            assert_eq!(ExperimentKind::from_name(k.name()), Some(k));
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
    }
}
