//! Numerical kernels for constructing a periodic planar Willmore curve, the
//! closed-form normal tilt that solves its linearized equation, the 1D
//! transition-layer profiles of the scalar Cahn-Hilliard operator, and the
//! five-term approximate solution glued along the rescaled curve — together
//! with the measurement machinery (weighted residual norms, slope fits,
//! projection tests, monotonicity and zero-set scans) used to certify the
//! construction quantitatively.
//!
//! The crate is `no_std` + `alloc`; everything IO-related lives in the
//! companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod approx;
pub mod curve;
pub mod fft;
pub mod jet;
pub mod layer;
pub mod linalg;
pub mod linwill;
pub mod mu;
pub mod phibar;
pub mod quad;
pub mod residual;
pub mod specfun;

pub use specfun::{agm_elliptic_k, dilog, gamma_fn, gamma_ln, gamma_ratio, jacobi_cn, jacobi_sn_cn_dn};
