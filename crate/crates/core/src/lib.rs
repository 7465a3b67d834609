//! Performance statistics of a continuous reconfigurable intelligent surface
//! (RIS) under the SNR-optimal phase design.
//!
//! * [`specfun`]: special-function kernels.
//! * [`quadrature`]: adaptive Gauss-Kronrod and composite Gauss-Legendre rules.
//! * [`sysmodel`]: surface geometry, correlation models, link budget and BS array.
//! * [`analytic`]: moments of the surface amplitude, SNR moments, gamma outage
//!   approximation, spectral-efficiency bound and channel-hardening metric.
//! * [`mcsim`]: Monte Carlo simulator of the correlated surface field.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod mcsim;
pub mod quadrature;
pub mod specfun;
pub mod sysmodel;

mod linalg;

pub use error::{Error, Result};
