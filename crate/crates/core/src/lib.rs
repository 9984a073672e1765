//! CUSUM change-point tests for sequences of independent block maxima.
//!
//! The tests compare, at every admissible split point, GEV parameter
//! estimates obtained from probability weighted moments (PWM) or
//! generalized PWM of the two subsamples. Asymptotic p-values come from the
//! Kolmogorov distribution, with the long-run variance estimated from
//! pseudo-observations.
//!
//! The crate is `no_std` and only needs an allocator.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod cusum;
pub mod detie;
pub mod distributions;
pub mod error;
pub mod gev_maps;
pub mod moments;
pub mod montecarlo;
mod ratios;
pub mod sample;

pub use cusum::{run_battery, run_test, TestConfig, TestFamily, TestResult};
pub use distributions::{BaseDistribution, GevParams, GpdParams};
pub use error::{Error, Result};
pub use gev_maps::{GevMapKind, Parameter};
pub use moments::{Estimator, MomentTriple, WeightFamily};
pub use sample::Sample;
