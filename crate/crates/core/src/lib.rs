//! Extended Kalman filtering on compact real Stiefel manifolds `St(n,k)`
//! with projected-normal measurements.
//!
//! The crate is layered bottom-up:
//!
//! * [`matcore`]: dense matrix kernels (Jacobi eigensolver, inverse square
//!   root, Padé matrix exponential, thin QR).
//! * [`stiefel`]: canonical-metric geometry: polar projection, tangent
//!   spaces, exponential and logarithm maps, Haar sampling.
//! * [`stats`]: isotropic and projected normals, maximal scalar variance,
//!   the Padé variance map and its inverse, Fréchet means.
//! * [`filter`]: the filter recursion and its diagnostics.

pub mod error;
pub mod filter;
pub mod matcore;
pub mod stats;
pub mod stiefel;
pub mod tolerance;

pub use error::{Error, Result};
pub use matcore::{AmbientMatrix, Matrix};
pub use stiefel::{ManifoldSpec, StiefelPoint, StiefelShape, TangentVector};
