//! First-passage (FPT) and first-exit (FET) times of one-dimensional diffusions
//! under Poissonian resetting.
//!
//! The resetting transforms are assembled from the Laplace transform of the
//! passage time of the underlying diffusion without resets:
//!
//! ```text
//! M_r(x, λ) = (r M_0(x_R, λ+r) + λ M_0(x, λ+r)) / (λ + r M_0(x_R, λ+r))
//! E[τ(x, r)] = (1 - M_0(x, r)) / (r M_0(x_R, r))
//! ```
//!
//! Supported underlying diffusions are drifted Brownian motion,
//! Ornstein-Uhlenbeck, CIR (through `Y = √X`), and diffusions conjugated to
//! Brownian motion by an increasing map `v` with `v(0) = 0`.
//!
//! Numerical kernels ([`quadrature`], [`minimize`], and the Brownian closed
//! forms in [`transform`]) are generic over [`num_traits::Float`]; the
//! Brownian forms are also evaluated on [`dual::Dual`] numbers to obtain exact
//! λ-derivatives for second moments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dual;
pub mod error;
pub mod minimize;
pub mod model;
pub mod montecarlo;
pub mod optimize;
pub mod quadrature;
pub mod resetting;
pub mod special;
pub mod tables;
pub mod transform;

pub use error::{Error, Result};
pub use model::{MapKind, ModelSpec, MonotoneMap, ProblemKind, ProblemSpec};
pub use montecarlo::{McEstimate, SimConfig};
pub use optimize::{OptResult, ScanResult};
pub use resetting::MomentResult;
pub use transform::LtValue;

/// Working scalar for the analytic and simulation layers.
pub type Real = f64;

/// Forward-mode dual number over [`Real`], carrying one derivative.
pub type DualReal = dual::Dual<Real>;
