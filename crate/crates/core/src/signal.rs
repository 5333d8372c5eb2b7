//! Signal model: spike trains, uniform sampling of their convolution with a
//! scaled kernel, the explicit convolution matrix, and seeded noise and
//! support generators.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Seeded generator used everywhere randomness appears.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A univariate spike train `x = Σ c_m δ_{t_m}` with strictly increasing
/// positions and nonzero amplitudes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpikeTrain {
    positions: Vec<f64>,
    amplitudes: Vec<f64>,
}

impl SpikeTrain {
    pub fn new(positions: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        if positions.len() != amplitudes.len() {
            return Err(Error::Shape(format!(
                "{} positions but {} amplitudes",
                positions.len(),
                amplitudes.len()
            )));
        }
        if let Some(i) = positions.iter().chain(&amplitudes).position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at entry {i}")));
        }
        if let Some(i) = amplitudes.iter().position(|&c| c == 0.0) {
            return Err(Error::InvalidArgument(format!("zero amplitude at index {i}")));
        }
        if let Some(i) = positions.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "positions must be strictly increasing (index {})",
                i + 1
            )));
        }
        Ok(Self { positions, amplitudes })
    }

    /// Sorts `(t, c)` pairs by position, dropping zero amplitudes.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        pairs.retain(|&(_, c)| c != 0.0);
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (p, a) = pairs.into_iter().unzip();
        Self::new(p, a)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `Σ |c_m|`
    pub fn l1_mass(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.abs()).sum()
    }

    /// Multiplies every amplitude by `factor` (nonzero).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.positions.clone(), self.amplitudes.iter().map(|c| c * factor).collect())
    }

    /// Minimum gap between consecutive positions; `+∞` for fewer than two.
    pub fn min_separation(&self) -> f64 {
        self.positions
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Dense grid vector with `c_m` at the sample of each position. Every
    /// position must lie on the grid.
    pub fn to_grid_vector(&self, grid: &SampleGrid) -> Result<DVector<f64>> {
        let mut x = DVector::zeros(grid.len());
        for (&t, &c) in self.positions.iter().zip(&self.amplitudes) {
            let i = grid
                .index_of(t)
                .ok_or_else(|| Error::InvalidArgument(format!("spike at {t} is not on the grid")))?;
            x[i] += c;
        }
        Ok(x)
    }
}

/// A bivariate spike train with lexicographically sorted distinct points.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpikeTrain2d {
    positions: Vec<(f64, f64)>,
    amplitudes: Vec<f64>,
}

impl SpikeTrain2d {
    pub fn new(mut pairs: Vec<((f64, f64), f64)>) -> Result<Self> {
        pairs.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0).then(a.0 .1.total_cmp(&b.0 .1)));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("duplicate 2D spike position".into()));
        }
        if pairs.iter().any(|&((t, u), c)| c == 0.0 || !(t.is_finite() && u.is_finite() && c.is_finite())) {
            return Err(Error::InvalidArgument("zero or non-finite 2D spike".into()));
        }
        let (positions, amplitudes) = pairs.into_iter().unzip();
        Ok(Self { positions, amplitudes })
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Uniform grid `{k/N : a ≤ k/N ≤ b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    n: u32,
    a: f64,
    b: f64,
    k_min: i64,
    len: usize,
}

impl SampleGrid {
    pub fn new(n: u32, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid density N must be positive".into()));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
        }
        let nf = n as f64;
        let k_min = (a * nf - 1e-9).ceil() as i64;
        let k_max = (b * nf + 1e-9).floor() as i64;
        if k_max < k_min {
            return Err(Error::InvalidArgument(format!("no grid point k/{n} in [{a}, {b}]")));
        }
        Ok(Self { n, a, b, k_min, len: (k_max - k_min + 1) as usize })
    }

    pub fn density(&self) -> u32 {
        self.n
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Integer index `k` of the `i`-th sample.
    pub fn k(&self, i: usize) -> i64 {
        self.k_min + i as i64
    }

    /// Sample time `k/N` of the `i`-th sample.
    pub fn t(&self, i: usize) -> f64 {
        self.k(i) as f64 / self.n as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.t(i)).collect()
    }

    /// Position of the sample at time `t`, if `t` is on the grid (within
    /// 1e−6 of a step).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let kf = t * self.n as f64;
        let k = kf.round();
        if (kf - k).abs() > 1e-6 {
            return None;
        }
        let i = k as i64 - self.k_min;
        (0..self.len as i64).contains(&i).then_some(i as usize)
    }
}

/// Measurements `y[k]` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    pub grid: SampleGrid,
    pub values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(grid: SampleGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!("{} values for a {}-point grid", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.values)
    }
}

/// How noise is calibrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// Rescale so that `‖e‖₁ = δ`.
    L1Budget { level: f64, seed: u64 },
    /// Rescale so that `10 log₁₀(‖y‖₂² / ‖e‖₂²)` hits the target.
    SnrDb { level: f64, seed: u64 },
}

impl NoiseSpec {
    pub fn seed(&self) -> u64 {
        match *self {
            NoiseSpec::L1Budget { seed, .. } | NoiseSpec::SnrDb { seed, .. } => seed,
        }
    }
}

/// Result of [`add_noise`].
#[derive(Debug, Clone, PartialEq)]
pub struct NoisySignal {
    pub noisy: SampledSignal,
    pub achieved_delta: f64,
    pub achieved_snr_db: f64,
}

/// `y[k] = Σ_m c_m K((k/N − t_m)/σ)` summed exactly over all spikes.
pub fn sample_signal(kernel: &KernelSpec, sigma: f64, spikes: &SpikeTrain, grid: &SampleGrid) -> Result<SampledSignal> {
    kernel.require_dim(1)?;
    check_sigma(sigma)?;
    let values = (0..grid.len())
        .map(|i| {
            let t = grid.t(i);
            spikes
                .positions()
                .iter()
                .zip(spikes.amplitudes())
                .map(|(&tm, &c)| c * kernel.value((t - tm) / sigma, 0))
                .sum()
        })
        .collect();
    SampledSignal::new(*grid, values)
}

/// Bivariate sampling on the product grid `grid_t × grid_u`, row-major in
/// `t` (index `i * grid_u.len() + j`).
pub fn sample_signal_2d(
    kernel: &KernelSpec,
    sigma: (f64, f64),
    spikes: &SpikeTrain2d,
    grid_t: &SampleGrid,
    grid_u: &SampleGrid,
) -> Result<Vec<f64>> {
    kernel.require_dim(2)?;
    check_sigma(sigma.0)?;
    check_sigma(sigma.1)?;
    let mut out = Vec::with_capacity(grid_t.len() * grid_u.len());
    for i in 0..grid_t.len() {
        let t = grid_t.t(i);
        for j in 0..grid_u.len() {
            let u = grid_u.t(j);
            out.push(
                spikes
                    .positions()
                    .iter()
                    .zip(spikes.amplitudes())
                    .map(|(&(tm, um), &c)| c * kernel.value2((t - tm) / sigma.0, (u - um) / sigma.1, 0, 0))
                    .sum(),
            );
        }
    }
    Ok(out)
}

/// Square convolution matrix with entries `K((j − k)/(Nσ))`.
pub fn convolution_matrix(kernel: &KernelSpec, sigma: f64, grid: &SampleGrid) -> Result<DMatrix<f64>> {
    kernel.require_dim(1)?;
    check_sigma(sigma)?;
    let n = grid.len();
    let scale = grid.density() as f64 * sigma;
    // one kernel evaluation per diagonal keeps the Toeplitz structure exact
    let diag: Vec<f64> = (0..n).map(|d| kernel.value(d as f64 / scale, 0)).collect();
    Ok(DMatrix::from_fn(n, n, |j, k| diag[j.abs_diff(k)]))
}

/// `σ_max / σ_min` from a singular value decomposition; `+∞` when the
/// smallest singular value is zero.
pub fn condition_number(matrix: &DMatrix<f64>) -> Result<f64> {
    if !matrix.is_square() {
        return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
    }
    if matrix.is_empty() {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let sv = matrix.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 || !(max / min).is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

/// Adds i.i.d. Gaussian noise rescaled to the requested ℓ1 budget or SNR.
pub fn add_noise(y: &SampledSignal, spec: &NoiseSpec) -> Result<NoisySignal> {
    let mut rng = rng_from_seed(spec.seed());
    let mut e: Vec<f64> = (0..y.values.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let signal_power: f64 = y.values.iter().map(|v| v * v).sum();
    match *spec {
        NoiseSpec::L1Budget { level, .. } => {
            if !(level >= 0.0) || !level.is_finite() {
                return Err(Error::InvalidArgument(format!("l1 budget must be nonnegative, got {level}")));
            }
            let l1: f64 = e.iter().map(|v| v.abs()).sum();
            let scale = if l1 > 0.0 { level / l1 } else { 0.0 };
            e.iter_mut().for_each(|v| *v *= scale);
        }
        NoiseSpec::SnrDb { level, .. } => {
            if signal_power == 0.0 {
                return Err(Error::InvalidArgument("SNR calibration needs a nonzero signal".into()));
            }
            if !level.is_finite() {
                return Err(Error::InvalidArgument(format!("invalid SNR {level}")));
            }
            let noise_power: f64 = e.iter().map(|v| v * v).sum();
            let target = signal_power / 10f64.powf(level / 10.0);
            let scale = (target / noise_power).sqrt();
            e.iter_mut().for_each(|v| *v *= scale);
        }
    }
    let achieved_delta = e.iter().map(|v| v.abs()).sum();
    let noise_power: f64 = e.iter().map(|v| v * v).sum();
    let achieved_snr_db = if noise_power == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (signal_power / noise_power).log10()
    };
    let values = y.values.iter().zip(&e).map(|(a, b)| a + b).collect();
    Ok(NoisySignal { noisy: SampledSignal::new(y.grid, values)?, achieved_delta, achieved_snr_db })
}

/// Max rejections before [`random_separated_support`] gives up.
pub const MAX_REJECTIONS: usize = 10_000;

/// Draws grid positions on `[a, b]` (step `step`) one at a time, keeping a
/// draw only if it is at least `min_gap` away from every accepted position.
/// Returns the sorted positions, possibly fewer than `count_target`.
pub fn random_separated_support(
    count_target: usize,
    interval: (f64, f64),
    step: f64,
    min_gap: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let (a, b) = interval;
    if !(step > 0.0) || !(b > a) {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}] or step {step}")));
    }
    if min_gap < step * (1.0 - 1e-9) {
        return Err(Error::InvalidArgument(format!("min_gap {min_gap} below step {step}")));
    }
    let inv = (1.0 / step).round();
    let integral = (inv * step - 1.0).abs() < 1e-9;
    let i0 = (a / step - 1e-9).ceil() as i64;
    let i1 = (b / step + 1e-9).floor() as i64;
    let to_t = |i: i64| if integral { i as f64 / inv } else { i as f64 * step };
    // gap measured in steps to dodge float noise in t
    let gap_steps = (min_gap / step * (1.0 - 1e-9)).ceil() as i64;

    let mut rng = rng_from_seed(seed);
    let mut chosen: Vec<i64> = Vec::new();
    let mut rejections = 0;
    while chosen.len() < count_target && rejections < MAX_REJECTIONS && i1 >= i0 {
        let i = rng.random_range(i0..=i1);
        if chosen.iter().all(|&j| (i - j).abs() >= gap_steps) {
            chosen.push(i);
        } else {
            rejections += 1;
        }
    }
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(to_t).collect())
}

/// Bivariate counterpart with the max-norm separation of the 2D
/// separation condition (unit σ in both axes).
pub fn random_separated_support_2d(
    count_target: usize,
    square: (f64, f64),
    step: f64,
    min_gap: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let (a, b) = square;
    if !(step > 0.0) || !(b > a) || min_gap < step * (1.0 - 1e-9) {
        return Err(Error::InvalidArgument("bad 2D support parameters".into()));
    }
    let i0 = (a / step - 1e-9).ceil() as i64;
    let i1 = (b / step + 1e-9).floor() as i64;
    let gap_steps = (min_gap / step * (1.0 - 1e-9)).ceil() as i64;
    let mut rng = rng_from_seed(seed);
    let mut chosen: Vec<(i64, i64)> = Vec::new();
    let mut rejections = 0;
    while chosen.len() < count_target && rejections < MAX_REJECTIONS {
        let p = (rng.random_range(i0..=i1), rng.random_range(i0..=i1));
        if chosen.iter().all(|q| (p.0 - q.0).abs().max((p.1 - q.1).abs()) >= gap_steps) {
            chosen.push(p);
        } else {
            rejections += 1;
        }
    }
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|(i, j)| (i as f64 * step, j as f64 * step)).collect())
}

/// I.i.d. `N(0, std²)` amplitudes; exact zeros are redrawn.
pub fn random_amplitudes(count: usize, std: f64, seed: u64) -> Result<Vec<f64>> {
    let dist = Normal::new(0.0, std)
        .map_err(|e| Error::InvalidArgument(format!("amplitude std {std}: {e}")))?;
    if !(std > 0.0) {
        return Err(Error::InvalidArgument(format!("amplitude std must be positive, got {std}")));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..count)
        .map(|_| loop {
            let c = dist.sample(&mut rng);
            if c != 0.0 {
                break c;
            }
        })
        .collect())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_train_invariants() {
        assert!(SpikeTrain::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(SpikeTrain::new(vec![0.0], vec![0.0]).is_err());
        assert!(SpikeTrain::new(vec![0.0], vec![]).is_err());
        let s = SpikeTrain::from_pairs(vec![(0.5, 1.0), (-0.5, 2.0), (0.1, 0.0)]).unwrap();
        assert_eq!(s.positions(), &[-0.5, 0.5]);
        assert_eq!(s.l1_mass(), 3.0);
    }

    #[test]
    fn grid_indexing() {
        let g = SampleGrid::new(100, -1.0, 1.0).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g.k(0), -100);
        assert_eq!(g.t(200), 1.0);
        assert_eq!(g.index_of(0.0), Some(100));
        assert_eq!(g.index_of(0.005), None);
        assert_eq!(g.index_of(1.5), None);
        assert!(SampleGrid::new(0, 0.0, 1.0).is_err());
        assert!(SampleGrid::new(10, 1.0, 1.0).is_err());
    }

    #[test]
    fn sample_examples() {
        let g = KernelSpec::gaussian();
        let grid = SampleGrid::new(1, -1.0, 1.0).unwrap();
        let s = SpikeTrain::new(vec![0.0], vec![1.0]).unwrap();
        let y = sample_signal(&g, 1.0, &s, &grid).unwrap();
        let e = (-0.5f64).exp();
        assert_eq!(y.values, vec![e, 1.0, e]);

        let empty = sample_signal(&g, 0.3, &SpikeTrain::empty(), &grid).unwrap();
        assert!(empty.values.iter().all(|&v| v == 0.0));

        let c = KernelSpec::cauchy();
        let grid = SampleGrid::new(100, 0.0, 1.0).unwrap();
        let s = SpikeTrain::new(vec![0.5], vec![2.0]).unwrap();
        let y = sample_signal(&c, 0.1, &s, &grid).unwrap();
        assert_eq!(y.values[50], 2.0);
        assert!(sample_signal(&c, 0.0, &s, &grid).is_err());
    }

    #[test]
    fn convolution_matrix_examples() {
        let g = KernelSpec::gaussian();
        let grid = SampleGrid::new(100, -1.0, 1.0).unwrap();
        let m = convolution_matrix(&g, 0.1, &grid).unwrap();
        assert_eq!(m.shape(), (201, 201));
        assert!((0..201).all(|i| m[(i, i)] == 1.0));
        assert_eq!(m, m.transpose());
        // interior rows see the full kernel; tails beyond ±0.5 are < 1e−12
        let r0: f64 = m.row(100).iter().sum();
        let r1: f64 = m.row(90).iter().sum();
        assert!((r0 - r1).abs() < 1e-12);

        let c = convolution_matrix(&KernelSpec::cauchy(), 1.0, &SampleGrid::new(1, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(c, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]));
    }

    #[test]
    fn condition_number_examples() {
        assert_eq!(condition_number(&DMatrix::identity(4, 4)).unwrap(), 1.0);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        assert!((condition_number(&d).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(condition_number(&DMatrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
        assert_eq!(condition_number(&DMatrix::zeros(2, 2)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn noise_calibration() {
        let grid = SampleGrid::new(100, -1.0, 1.0).unwrap();
        let s = SpikeTrain::new(vec![0.0], vec![1.0]).unwrap();
        let y = sample_signal(&KernelSpec::gaussian(), 0.1, &s, &grid).unwrap();

        let same = add_noise(&y, &NoiseSpec::L1Budget { level: 0.0, seed: 1 }).unwrap();
        assert_eq!(same.noisy, y);
        assert_eq!(same.achieved_delta, 0.0);

        let n = add_noise(&y, &NoiseSpec::L1Budget { level: 20.0, seed: 3 }).unwrap();
        let l1: f64 = n.noisy.values.iter().zip(&y.values).map(|(a, b)| (a - b).abs()).sum();
        assert!((l1 - 20.0).abs() < 1e-12);

        let snr = add_noise(&y, &NoiseSpec::SnrDb { level: 17.9, seed: 3 }).unwrap();
        assert!((snr.achieved_snr_db - 17.9).abs() < 1e-9);

        let zero = SampledSignal::new(grid, vec![0.0; grid.len()]).unwrap();
        assert!(add_noise(&zero, &NoiseSpec::SnrDb { level: 10.0, seed: 0 }).is_err());
        assert!(add_noise(&y, &NoiseSpec::L1Budget { level: -1.0, seed: 0 }).is_err());
    }

    #[test]
    fn separated_support_examples() {
        let p = random_separated_support(5, (-1.0, 1.0), 0.01, 0.11, 7).unwrap();
        assert_eq!(p.len(), 5);
        let grid = SampleGrid::new(100, -1.0, 1.0).unwrap();
        assert!(p.iter().all(|&t| grid.index_of(t).is_some()));
        assert!(p.windows(2).all(|w| w[1] - w[0] >= 0.11 - 1e-12));
        assert_eq!(p, random_separated_support(5, (-1.0, 1.0), 0.01, 0.11, 7).unwrap());

        let crowded = random_separated_support(1000, (-1.0, 1.0), 0.01, 0.5, 3).unwrap();
        assert!(crowded.len() <= 5);
        assert!(random_separated_support(3, (-1.0, 1.0), 0.01, 0.001, 0).is_err());
    }

    #[test]
    fn amplitude_examples() {
        assert_eq!(random_amplitudes(4, 1.0, 9).unwrap(), random_amplitudes(4, 1.0, 9).unwrap());
        assert!(random_amplitudes(0, 1.0, 9).unwrap().is_empty());
        let a = random_amplitudes(100_000, 1.0, 11).unwrap();
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        let var = a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (a.len() - 1) as f64;
        assert!((0.98..=1.02).contains(&var.sqrt()));
        assert!(random_amplitudes(3, 0.0, 1).is_err());
    }
}
