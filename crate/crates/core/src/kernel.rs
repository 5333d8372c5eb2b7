//! Pulse kernels and their admissibility constants.
//!
//! A kernel is an even `C³` function `K` with derivative envelopes
//! `|K⁽ℓ⁾(t)| ≤ C_ℓ / (1 + t²)` (global property) and a concave cap
//! `K⁽²⁾(t) < −β` on `|t| ≤ ε` (local property). Bivariate kernels replace
//! the envelope with `C_{ℓ₁,ℓ₂} / (1 + t² + u²)^{3/2}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};

/// Highest derivative order any kernel must provide.
pub const MAX_ORDER: usize = 3;

/// Univariate evaluator: `(t, order) -> K⁽ᵒʳᵈᵉʳ⁾(t)`, orders `0..=3`.
pub type Evaluator = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

/// Bivariate evaluator: `(t, u, order_t, order_u) -> K₂⁽ᵒʳᵈᵉʳ_ᵗ,ᵒʳᵈᵉʳ_ᵘ⁾(t, u)`.
pub type Evaluator2 = Arc<dyn Fn(f64, f64, usize, usize) -> f64 + Send + Sync>;

/// One-dimensional kernel profile.
#[derive(Clone)]
pub enum Profile {
    /// `e^{−t²/2}`
    Gaussian,
    /// `1 / (1 + t²)`
    Cauchy,
    /// User-supplied, with all derivatives up to order 3 explicit.
    Custom { name: String, eval: Evaluator },
}

impl Profile {
    #[inline]
    fn value(&self, t: f64, order: usize) -> f64 {
        match self {
            Profile::Gaussian => {
                let g = (-0.5 * t * t).exp();
                match order {
                    0 => g,
                    1 => -t * g,
                    2 => (t * t - 1.0) * g,
                    _ => t * (3.0 - t * t) * g,
                }
            }
            Profile::Cauchy => {
                let w = 1.0 / (1.0 + t * t);
                match order {
                    0 => w,
                    1 => -2.0 * t * w * w,
                    2 => (6.0 * t * t - 2.0) * w * w * w,
                    _ => 24.0 * t * (1.0 - t * t) * w * w * w * w,
                }
            }
            Profile::Custom { eval, .. } => eval(t, order),
        }
    }

    fn name(&self) -> &str {
        match self {
            Profile::Gaussian => "gaussian",
            Profile::Cauchy => "cauchy",
            Profile::Custom { name, .. } => name,
        }
    }
}

#[derive(Clone)]
enum Shape {
    Univariate(Profile),
    /// `K₂(t, u) = K(t) K(u)`.
    Tensor(Profile),
    Bivariate { name: String, eval: Evaluator2 },
}

/// A pulse kernel, immutable after construction.
#[derive(Clone)]
pub struct KernelSpec {
    shape: Shape,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name())
            .field("dim", &self.dim())
            .finish()
    }
}

impl KernelSpec {
    pub fn gaussian() -> Self {
        Self { shape: Shape::Univariate(Profile::Gaussian) }
    }

    pub fn cauchy() -> Self {
        Self { shape: Shape::Univariate(Profile::Cauchy) }
    }

    /// A custom univariate kernel. `eval(t, ℓ)` must return `K⁽ℓ⁾(t)` for
    /// `ℓ ∈ 0..=3`; derivatives are never approximated internally.
    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64, usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            shape: Shape::Univariate(Profile::Custom { name: name.into(), eval: Arc::new(eval) }),
        }
    }

    /// A custom bivariate kernel, `eval(t, u, ℓ₁, ℓ₂)` for `ℓ₁ + ℓ₂ ≤ 3`.
    pub fn custom_2d<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64, f64, usize, usize) -> f64 + Send + Sync + 'static,
    {
        Self { shape: Shape::Bivariate { name: name.into(), eval: Arc::new(eval) } }
    }

    /// Looks up a built-in univariate kernel by name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::gaussian()),
            "cauchy" => Ok(Self::cauchy()),
            other => Err(Error::UnknownKernel(other.to_string())),
        }
    }

    /// Tensor-product extension `K₂(t, u) = K(t) K(u)` of a 1D kernel.
    pub fn tensor(&self) -> Result<Self> {
        match &self.shape {
            Shape::Univariate(p) => Ok(Self { shape: Shape::Tensor(p.clone()) }),
            _ => Err(Error::Dimension { expected: 1 }),
        }
    }

    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::Univariate(_) => 1,
            _ => 2,
        }
    }

    pub fn name(&self) -> String {
        match &self.shape {
            Shape::Univariate(p) => p.name().to_string(),
            Shape::Tensor(p) => format!("{}^2", p.name()),
            Shape::Bivariate { name, .. } => name.clone(),
        }
    }

    /// `K⁽ᵒʳᵈᵉʳ⁾(t)` for a univariate kernel.
    pub fn eval(&self, t: f64, order: usize) -> Result<f64> {
        let Shape::Univariate(p) = &self.shape else {
            return Err(Error::Dimension { expected: 1 });
        };
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder { order, max: MAX_ORDER });
        }
        Ok(p.value(t, order))
    }

    /// Mixed partial `K₂⁽ᵒʳᵈᵉʳ_ᵗ,ᵒʳᵈᵉʳ_ᵘ⁾(t, u)` for a bivariate kernel.
    pub fn eval2(&self, t: f64, u: f64, order_t: usize, order_u: usize) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::Dimension { expected: 2 });
        }
        if order_t + order_u > MAX_ORDER {
            return Err(Error::UnsupportedOrder { order: order_t + order_u, max: MAX_ORDER });
        }
        Ok(self.value2(t, u, order_t, order_u))
    }

    /// Unchecked univariate evaluation; callers guarantee `dim() == 1` and
    /// `order <= 3`.
    #[inline]
    pub(crate) fn value(&self, t: f64, order: usize) -> f64 {
        match &self.shape {
            Shape::Univariate(p) => p.value(t, order),
            _ => unreachable!("univariate evaluation of a 2D kernel"),
        }
    }

    /// Unchecked bivariate evaluation.
    #[inline]
    pub(crate) fn value2(&self, t: f64, u: f64, order_t: usize, order_u: usize) -> f64 {
        match &self.shape {
            Shape::Tensor(p) => p.value(t, order_t) * p.value(u, order_u),
            Shape::Bivariate { eval, .. } => eval(t, u, order_t, order_u),
            Shape::Univariate(_) => unreachable!("bivariate evaluation of a 1D kernel"),
        }
    }

    pub(crate) fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::Dimension { expected: dim })
        }
    }

    /// Default local-property radius: 0.5 for Gaussian, 0.3 for Cauchy
    /// (tensor products inherit it); 0.1 for custom kernels.
    pub fn default_epsilon(&self) -> f64 {
        let profile = match &self.shape {
            Shape::Univariate(p) | Shape::Tensor(p) => Some(p),
            Shape::Bivariate { .. } => None,
        };
        match profile {
            Some(Profile::Gaussian) => 0.5,
            Some(Profile::Cauchy) => 0.3,
            _ => 0.1,
        }
    }
}

/// Grid estimates of the global constants `C_ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalConstants {
    /// Grid supremum of `|K⁽ℓ⁾(t)| (1 + t²)` plus 1% headroom.
    pub c: [f64; 4],
    /// The grid supremum itself.
    pub raw: [f64; 4],
    /// Where each supremum was attained.
    pub argmax: [f64; 4],
}

/// Headroom applied to every grid supremum.
pub const HEADROOM: f64 = 1.01;

/// Admissibility data of a univariate kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// `C_ℓ`, ℓ = 0..3.
    pub c: [f64; 4],
    /// `K(0)`
    pub k0: f64,
    /// `K⁽²⁾(0)`
    pub k2_0: f64,
    pub epsilon: f64,
    pub beta: f64,
    /// `K(ε)`, used by the far-region estimates.
    pub k_epsilon: f64,
    pub passed: bool,
}

impl AdmissibilityReport {
    pub fn c0(&self) -> f64 {
        self.c[0]
    }
    pub fn c1(&self) -> f64 {
        self.c[1]
    }
    pub fn c2(&self) -> f64 {
        self.c[2]
    }
    pub fn c3(&self) -> f64 {
        self.c[3]
    }

    /// Builds a report from externally known constants (e.g. published
    /// values) without probing a kernel.
    pub fn from_constants(c: [f64; 4], k0: f64, k2_0: f64, epsilon: f64, beta: f64, k_epsilon: f64) -> Self {
        let passed = c.iter().all(|&x| x > 0.0) && beta > 0.0 && k2_0 < 0.0 && k0 > 0.0;
        Self { c, k0, k2_0, epsilon, beta, k_epsilon, passed }
    }
}

/// Estimates `C_ℓ` as the maximum of `|K⁽ℓ⁾(t)| (1 + t²)` over the grid
/// `{−extent, −extent + step, …, extent}`, then adds 1% headroom.
pub fn estimate_global_constants(kernel: &KernelSpec, extent: f64, step: f64) -> Result<GlobalConstants> {
    kernel.require_dim(1)?;
    check_grid(extent, step)?;
    let n = (2.0 * extent / step).round() as usize;
    let mut raw = [0.0f64; 4];
    let mut argmax = [0.0f64; 4];
    for i in 0..=n {
        let t = -extent + i as f64 * step;
        let w = 1.0 + t * t;
        for (l, (r, a)) in raw.iter_mut().zip(argmax.iter_mut()).enumerate() {
            let v = kernel.value(t, l).abs() * w;
            if v > *r {
                *r = v;
                *a = t;
            }
        }
    }
    Ok(GlobalConstants { c: raw.map(|r| r * HEADROOM), raw, argmax })
}

/// Outcome of the local-property probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalProperty {
    pub epsilon: f64,
    /// `min_{|t| ≤ ε} −K⁽²⁾(t)`; non-positive when concavity fails.
    pub beta: f64,
    pub positive_on_window: bool,
    pub tail_below_edge: bool,
    pub passed: bool,
}

const LOCAL_STEP: f64 = 1e-4;
const TAIL_EXTENT: f64 = 20.0;
const TAIL_STEP: f64 = 1e-3;

/// Probes the local property on a `1e−4` grid over `[−ε, ε]` and the tail
/// condition `K(t) < K(ε)` on `ε < |t| ≤ 20`.
pub fn verify_local_property(kernel: &KernelSpec, epsilon: f64) -> Result<LocalProperty> {
    kernel.require_dim(1)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = (epsilon / LOCAL_STEP).ceil() as usize;
    let mut beta = f64::INFINITY;
    let mut positive = true;
    for i in 0..=n {
        let t = (i as f64 * LOCAL_STEP).min(epsilon);
        // even kernel: probe both signs anyway so custom kernels get checked
        for s in [t, -t] {
            beta = beta.min(-kernel.value(s, 2));
            positive &= kernel.value(s, 0) > 0.0;
        }
    }
    let edge = kernel.value(epsilon, 0).max(kernel.value(-epsilon, 0));
    let m = ((TAIL_EXTENT - epsilon) / TAIL_STEP).ceil() as usize;
    let tail = (1..=m).all(|i| {
        let t = epsilon + i as f64 * TAIL_STEP;
        kernel.value(t, 0) < edge && kernel.value(-t, 0) < edge
    });
    let passed = beta > 0.0 && positive && tail;
    Ok(LocalProperty { epsilon, beta, positive_on_window: positive, tail_below_edge: tail, passed })
}

/// Full admissibility report: global constants on `[−extent, extent]` and
/// the local property at radius `epsilon`.
pub fn admissibility(kernel: &KernelSpec, epsilon: f64, extent: f64, step: f64) -> Result<AdmissibilityReport> {
    let global = estimate_global_constants(kernel, extent, step)?;
    let local = verify_local_property(kernel, epsilon)?;
    let k0 = kernel.value(0.0, 0);
    let k2_0 = kernel.value(0.0, 2);
    let passed = local.passed && k2_0 < 0.0 && global.c.iter().all(|&c| c > 0.0 && c.is_finite());
    Ok(AdmissibilityReport {
        c: global.c,
        k0,
        k2_0,
        epsilon,
        beta: local.beta,
        k_epsilon: kernel.value(epsilon, 0),
        passed,
    })
}

/// Default report: extent 20, step 1e−3, the kernel's default ε.
pub fn default_admissibility(kernel: &KernelSpec) -> Result<AdmissibilityReport> {
    admissibility(kernel, kernel.default_epsilon(), 20.0, 1e-3)
}

/// All `(ℓ₁, ℓ₂)` with `ℓ₁ + ℓ₂ ≤ 3`.
pub fn orders_2d() -> impl Iterator<Item = (usize, usize)> {
    (0..=MAX_ORDER).flat_map(|a| (0..=MAX_ORDER - a).map(move |b| (a, b)))
}

/// Admissibility data of a bivariate kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility2dReport {
    /// `c[ℓ₁][ℓ₂]`, meaningful for `ℓ₁ + ℓ₂ ≤ 3` (zero otherwise).
    pub c: [[f64; 4]; 4],
    /// `c` recomputed on the half-extent square; equal to `c` when the
    /// decay envelope has converged.
    pub c_half_extent: [[f64; 4]; 4],
    pub decay_converged: bool,
    pub k00: f64,
    pub k20_0: f64,
    pub k02_0: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub passed: bool,
}

impl Admissibility2dReport {
    pub fn constant(&self, order_t: usize, order_u: usize) -> f64 {
        self.c[order_t][order_u]
    }
}

/// Bivariate global constants on `[−extent, extent]²`, weight
/// `(1 + t² + u²)^{3/2}`, plus the local property at `epsilon`.
///
/// The envelope is also evaluated on the half-extent square; if any constant
/// grows by more than the 1% headroom between the two, the kernel decays too
/// slowly for the bivariate global property and `passed` is false.
pub fn admissibility_2d(
    kernel: &KernelSpec,
    epsilon: f64,
    extent: f64,
    step: f64,
    mode: ExecMode,
) -> Result<Admissibility2dReport> {
    kernel.require_dim(2)?;
    check_grid(extent, step)?;
    let n = (2.0 * extent / step).round() as usize;
    let half = extent / 2.0;
    // per row: (full, half) maxima for each order pair
    let rows = exec::map_indexed(mode, n + 1, |i| {
        let t = -extent + i as f64 * step;
        let mut full = [[0.0f64; 4]; 4];
        let mut inner = [[0.0f64; 4]; 4];
        for j in 0..=n {
            let u = -extent + j as f64 * step;
            let w = (1.0 + t * t + u * u).powf(1.5);
            let in_half = t.abs() <= half + 1e-12 && u.abs() <= half + 1e-12;
            for (a, b) in orders_2d() {
                let v = kernel.value2(t, u, a, b).abs() * w;
                full[a][b] = full[a][b].max(v);
                if in_half {
                    inner[a][b] = inner[a][b].max(v);
                }
            }
        }
        (full, inner)
    });
    let mut c = [[0.0f64; 4]; 4];
    let mut c_half = [[0.0f64; 4]; 4];
    for (full, inner) in &rows {
        for (a, b) in orders_2d() {
            c[a][b] = c[a][b].max(full[a][b]);
            c_half[a][b] = c_half[a][b].max(inner[a][b]);
        }
    }
    for (a, b) in orders_2d() {
        c[a][b] *= HEADROOM;
        c_half[a][b] *= HEADROOM;
    }
    let decay_converged = orders_2d().all(|(a, b)| c[a][b] <= c_half[a][b] * HEADROOM);

    // local property on the ε-square
    let m = (epsilon / LOCAL_STEP.max(epsilon / 400.0)).ceil() as usize;
    let h = epsilon / m as f64;
    let mut beta = f64::INFINITY;
    for i in 0..=2 * m {
        let t = -epsilon + i as f64 * h;
        for j in 0..=2 * m {
            let u = -epsilon + j as f64 * h;
            beta = beta.min(-kernel.value2(t, u, 2, 0)).min(-kernel.value2(t, u, 0, 2));
        }
    }
    let edge_t = kernel.value2(epsilon, 0.0, 0, 0);
    let edge_u = kernel.value2(0.0, epsilon, 0, 0);
    let coarse = (step * 10.0).max(1e-2);
    let k = (2.0 * extent / coarse).round() as usize;
    let mut tail = edge_t > 0.0 && edge_u > 0.0;
    'outer: for i in 0..=k {
        let t = -extent + i as f64 * coarse;
        for j in 0..=k {
            let u = -extent + j as f64 * coarse;
            let v = kernel.value2(t, u, 0, 0);
            if (t.abs() > epsilon && v >= edge_t) || (u.abs() > epsilon && v >= edge_u) {
                tail = false;
                break 'outer;
            }
        }
    }
    let k20_0 = kernel.value2(0.0, 0.0, 2, 0);
    let k02_0 = kernel.value2(0.0, 0.0, 0, 2);
    let passed = decay_converged && beta > 0.0 && tail && k20_0 < 0.0 && k02_0 < 0.0;
    Ok(Admissibility2dReport {
        c,
        c_half_extent: c_half,
        decay_converged,
        k00: kernel.value2(0.0, 0.0, 0, 0),
        k20_0,
        k02_0,
        epsilon,
        beta,
        passed,
    })
}

fn check_grid(extent: f64, step: f64) -> Result<()> {
    if !(extent > 0.0 && step > 0.0 && extent.is_finite() && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "extent and step must be positive (got extent={extent}, step={step})"
        )));
    }
    Ok(())
}
