//! Spectral and Monte Carlo numerics for the truncated Gibbs measure of the
//! derivative nonlinear Schrödinger equation on the circle.
//!
//! Everything here is `no_std` with `alloc`: the crate only needs heap
//! vectors and `libm` for transcendental functions. File formats, the CLI and
//! thread pools live in the `gibbs-dnls` companion crate.
//!
//! All integrals over the circle use the normalized measure
//! `dx / 2π`, so `∫ 1 = 1` and the Fourier modes `e^{inx}` are orthonormal.

#![no_std]
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

extern crate alloc;

pub mod chaos_stats;
pub mod density_moments;
pub mod error;
pub mod exec;
mod fft;
pub mod functionals;
pub mod hamiltonian_flow;
pub mod random_field;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use num_complex::Complex64;
pub use random_field::{Ensemble, SeedSpec};
pub use spectral::{FourierCoeffs, LpExponent, QuadratureGrid};
