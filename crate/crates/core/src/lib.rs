//! Recovery of pulse streams `y = Σ c_m K((t − t_m)/σ)` by ℓ1 minimization,
//! with numerical checks of the recovery guarantees: kernel admissibility
//! constants, dual certificates in one and two dimensions, and the ℓ1
//! stability bound for noisy grid recovery.

// `!(x > 0.0)` is how argument checks here reject NaN along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod io;
pub mod kernel;
pub mod lp;
pub mod plot;
pub mod recovery;
pub mod signal;
pub mod stability;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use kernel::{AdmissibilityReport, KernelSpec};
pub use recovery::{L1Problem, L1Solution};
pub use signal::{SampleGrid, SampledSignal, SpikeTrain};
