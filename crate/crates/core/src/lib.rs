//! Numerical diagnostics for Schatten-class membership of integral operators.
//!
//! Kernels live on `Tⁿ × Tⁿ` (`n = 1, 2`) and are handled through their double
//! Fourier coefficients; left-invariant operators on SU(2) and SO(3) are handled
//! through their diagonal matrix symbols. Every "is this sum finite" question is
//! answered by the geometric-cutoff classifier in [`powers`], never by a single
//! truncation.

pub mod diag_avg;
pub mod error;
pub mod kernels;
pub mod powers;
pub mod sobolev;
pub mod spectral;
pub mod su2;
pub mod torus_fourier;

pub use error::{Error, Result};
pub use num_complex::Complex64;
