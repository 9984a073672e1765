//! Classical CUSUM tests for a change in expectation and in variance,
//! studentized by the full-sample standard deviation of the monitored
//! quantity and calibrated with the Kolmogorov distribution.

use alloc::vec::Vec;

use crate::cusum::{p_value, TestResult};
use crate::error::{Error, Result};
use crate::sample::Sample;

/// `max_k k(n − k)/n^{3/2}·|mean(Z₁…Z_k) − mean(Z_{k+1}…Z_n)| / sd(Z)`.
fn studentized_mean_cusum(z: &[f64], r: usize) -> Result<TestResult> {
    let n = z.len();
    if r == 0 {
        return Err(Error::InvalidConfig("trim r must be at least 1".into()));
    }
    if n < 2 * r {
        return Err(Error::TooFewObservations { needed: 2 * r, got: n });
    }
    let nf = n as f64;
    let total: f64 = z.iter().sum();
    let mean = total / nf;
    let var = z.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nf;
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance(var));
    }
    let sd = libm::sqrt(var);
    let norm = libm::pow(nf, 1.5);
    let mut prefix = 0.0;
    let mut best = (f64::NEG_INFINITY, r);
    for (k, x) in z.iter().enumerate().take(n - r) {
        prefix += x;
        let k = k + 1;
        if k < r {
            continue;
        }
        let kf = k as f64;
        let left = prefix / kf;
        let right = (total - prefix) / (nf - kf);
        let term = kf * (nf - kf) / norm * (left - right).abs();
        if term > best.0 {
            best = (term, k);
        }
    }
    Ok(TestResult {
        n,
        statistic: best.0,
        sigma_hat: sd,
        p_value: p_value(best.0, sd),
        argmax_k: best.1,
        left_params: None,
        right_params: None,
        skipped_k: Vec::new(),
        correction: 1.0,
        offset: 0.0,
    })
}

/// CUSUM test for a change in expectation.
pub fn mean_cusum(sample: &Sample, r: usize) -> Result<TestResult> {
    if sample.is_constant() {
        return Err(Error::ConstantSample);
    }
    studentized_mean_cusum(sample, r)
}

/// CUSUM test for a change in variance: the mean CUSUM applied to the squared
/// deviations from the full-sample mean.
pub fn variance_cusum(sample: &Sample, r: usize) -> Result<TestResult> {
    if sample.is_constant() {
        return Err(Error::ConstantSample);
    }
    let mean = sample.mean();
    let sq: Vec<f64> = sample.iter().map(|x| (x - mean) * (x - mean)).collect();
    studentized_mean_cusum(&sq, r)
}
