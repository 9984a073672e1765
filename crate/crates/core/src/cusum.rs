//! CUSUM statistics comparing GEV parameter estimates before and after every
//! admissible split point, their studentization by a pseudo-observation
//! variance estimator, and asymptotic p-values.
//!
//! Three statistic families are provided:
//!
//! * [`TestFamily::PwmT`] uses the unbiased PWM estimator `b̂` on both sides
//!   of the split and no feasibility indicator, since `b̂` of a non-constant
//!   sample always lies in the feasibility domain.
//! * [`TestFamily::PwmS`] uses the plug-in PWM estimator `β̂` and discards
//!   splits where either side leaves the feasibility domain.
//! * [`TestFamily::GpwmS`] uses generalized PWM and discards splits where the
//!   GPWM system cannot be solved on either side. Its p-values rely on the
//!   same Kolmogorov limit as the PWM families, which is conjectured rather
//!   than proved for GPWM.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::distributions::{kolmogorov_cdf, GevParams};
use crate::error::{Error, Result};
use crate::gev_maps::{self, GevMapKind, Parameter};
use crate::moments::{
    b_hat, beta_hat, in_dh, in_dxi, prefix_suffix_moments, Estimator, MomentTriple,
    PrefixSuffixMoments, WeightFamily, DEFAULT_PLOTTING_GAMMA,
};
use crate::sample::Sample;

/// Default number of observations trimmed at each end of the split range.
pub const DEFAULT_TRIM: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TestFamily {
    PwmT,
    PwmS,
    GpwmS,
}

impl TestFamily {
    pub const ALL: [TestFamily; 3] = [TestFamily::PwmT, TestFamily::PwmS, TestFamily::GpwmS];

    pub fn estimator(self) -> Estimator {
        match self {
            TestFamily::PwmT => Estimator::BHat,
            _ => Estimator::BetaHat,
        }
    }

    pub fn weights(self) -> WeightFamily {
        match self {
            TestFamily::GpwmS => WeightFamily::Gpwm,
            _ => WeightFamily::Pwm,
        }
    }

    pub fn map(self) -> GevMapKind {
        match self {
            TestFamily::GpwmS => GevMapKind::GpwmApprox,
            _ => GevMapKind::PwmApprox,
        }
    }

    /// Plotting-position constant used for `β̂` and the pseudo-observations.
    pub fn default_gamma(self) -> f64 {
        match self {
            TestFamily::GpwmS => 0.0,
            _ => DEFAULT_PLOTTING_GAMMA,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TestFamily::PwmT => "pwm-t",
            TestFamily::PwmS => "pwm-s",
            TestFamily::GpwmS => "gpwm-s",
        }
    }
}

impl core::fmt::Display for TestFamily {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for TestFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "pwm-t" => Ok(TestFamily::PwmT),
            "pwm-s" => Ok(TestFamily::PwmS),
            "gpwm" | "gpwm-s" => Ok(TestFamily::GpwmS),
            _ => Err(Error::InvalidConfig(alloc::format!("unknown test family `{s}`"))),
        }
    }
}

/// Finite-sample factor applied to the estimated variance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum VarianceCorrection {
    /// `(n + 10)/n` for the `b̂`-based scale test, `(n + 20)/n` for the
    /// `b̂`-based shape test, no correction otherwise.
    Standard,
    None,
    Factor(f64),
}

impl VarianceCorrection {
    pub fn resolve(self, family: TestFamily, target: Parameter, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            VarianceCorrection::Standard => match (family, target) {
                (TestFamily::PwmT, Parameter::Sigma) => (nf + 10.0) / nf,
                (TestFamily::PwmT, Parameter::Xi) => (nf + 20.0) / nf,
                _ => 1.0,
            },
            VarianceCorrection::None => 1.0,
            VarianceCorrection::Factor(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TestConfig {
    pub family: TestFamily,
    pub target: Parameter,
    /// Only splits `k ∈ {r, …, n − r}` are considered.
    pub r: usize,
    /// Plotting-position constant; for [`TestFamily::PwmT`] it only enters
    /// the pseudo-observations.
    pub gamma: f64,
    /// Translate the data by the full-sample location estimate first.
    pub recenter: bool,
    pub variance_correction: VarianceCorrection,
}

impl TestConfig {
    pub fn new(family: TestFamily, target: Parameter) -> Self {
        TestConfig {
            family,
            target,
            r: DEFAULT_TRIM,
            gamma: family.default_gamma(),
            recenter: true,
            variance_correction: VarianceCorrection::Standard,
        }
    }

    /// The three tests of a family, one per GEV parameter.
    pub fn triple(family: TestFamily) -> [TestConfig; 3] {
        Parameter::ALL.map(|p| TestConfig::new(family, p))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidConfig("trim r must be at least 1".into()));
        }
        if n < 2 * self.r {
            return Err(Error::TooFewObservations { needed: 2 * self.r, got: n });
        }
        if !self.gamma.is_finite() {
            return Err(Error::InvalidConfig("plotting-position constant must be finite".into()));
        }
        if let VarianceCorrection::Factor(c) = self.variance_correction {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidConfig("variance correction must be positive".into()));
            }
        }
        Ok(())
    }

    fn group_key(&self) -> (TestFamily, u64, bool, usize) {
        (self.family, self.gamma.to_bits(), self.recenter, self.r)
    }
}

/// Maximum of the weighted split discrepancies.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SplitStatistic {
    pub value: f64,
    pub argmax_k: usize,
    /// Splits discarded because a side was infeasible or its estimate was
    /// not finite.
    pub skipped_k: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TestResult {
    pub n: usize,
    pub statistic: f64,
    pub sigma_hat: f64,
    pub p_value: f64,
    pub argmax_k: usize,
    /// Estimates on `X₁…X_k` and `X_{k+1}…X_n` at the maximizing split, on
    /// the original scale.
    pub left_params: Option<GevParams>,
    pub right_params: Option<GevParams>,
    pub skipped_k: Vec<usize>,
    /// Resolved variance correction factor.
    pub correction: f64,
    /// Amount subtracted from the data before testing (0 without recentering).
    pub offset: f64,
}

/// `1 − F_K(statistic/σ̂)`.
pub fn p_value(statistic: f64, sigma_hat: f64) -> f64 {
    (1.0 - kolmogorov_cdf(statistic / sigma_hat)).clamp(0.0, 1.0)
}

fn full_sample_moments(values: &[f64], family: TestFamily, gamma: f64) -> Result<MomentTriple> {
    match family {
        TestFamily::PwmT => b_hat(values),
        _ => beta_hat(values, family.weights(), gamma),
    }
}

/// Full-sample location estimate subtracted by [`recenter`].
pub fn location_offset(values: &[f64], family: TestFamily, gamma: f64) -> Result<f64> {
    let m = full_sample_moments(values, family, gamma)?;
    Ok(gev_maps::apply(family.map(), &m)?.mu)
}

/// Subtracts the full-sample location estimate of the configured family.
pub fn recenter(sample: &Sample, config: &TestConfig) -> Result<Sample> {
    let offset = location_offset(sample, config.family, config.gamma)?;
    sample.affine(1.0, -offset)
}

/// Estimates `(μ, σ, ξ)` on each side of every admissible split; `None`
/// marks an infeasible side.
struct SideEstimates {
    left: Vec<Option<[f64; 3]>>,
    right: Vec<Option<[f64; 3]>>,
}

fn side_estimate(family: TestFamily, m: Option<MomentTriple>) -> Option<[f64; 3]> {
    let m = m?;
    let as_array = |p: GevParams| [p.mu, p.sigma, p.xi];
    match family {
        TestFamily::PwmT => Some(gev_maps::pwm_approx_unchecked(&m)),
        TestFamily::PwmS => {
            if !in_dxi(&m) {
                return None;
            }
            gev_maps::pwm_to_gev_approx(&m).ok().map(as_array)
        }
        TestFamily::GpwmS => {
            if !in_dh(&m) {
                return None;
            }
            gev_maps::gpwm_to_gev_approx(&m).ok().map(as_array)
        }
    }
}

fn side_estimates(moments: &PrefixSuffixMoments, family: TestFamily, r: usize) -> SideEstimates {
    let n = moments.len();
    let mut left = vec![None; n + 1];
    let mut right = vec![None; n + 1];
    for k in r..=n - r {
        left[k] = side_estimate(family, moments.prefix[k]);
        right[k] = side_estimate(family, moments.suffix[k]);
    }
    SideEstimates { left, right }
}

fn engine_moments(values: &[f64], family: TestFamily, gamma: f64) -> Result<PrefixSuffixMoments> {
    let gamma = if family == TestFamily::PwmT { 0.0 } else { gamma };
    prefix_suffix_moments(values, family.estimator(), family.weights(), gamma)
}

fn component(target: Parameter) -> usize {
    match target {
        Parameter::Mu => 0,
        Parameter::Sigma => 1,
        Parameter::Xi => 2,
    }
}

/// Weighted discrepancy `k(n − k)/n^{3/2}·|left − right|` at each split, or
/// `None` where the split is skipped.
fn split_terms(sides: &SideEstimates, target: Parameter, r: usize) -> Vec<Option<f64>> {
    let n = sides.left.len() - 1;
    let c = component(target);
    let norm = libm::pow(n as f64, 1.5);
    let mut terms = vec![None; n + 1];
    for k in r..=n - r {
        if let (Some(a), Some(b)) = (sides.left[k], sides.right[k]) {
            let d = a[c] - b[c];
            if d.is_finite() {
                terms[k] = Some((k * (n - k)) as f64 / norm * d.abs());
            }
        }
    }
    terms
}

fn maximize(terms: &[Option<f64>], r: usize) -> Result<SplitStatistic> {
    let n = terms.len() - 1;
    let mut best: Option<(f64, usize)> = None;
    let mut skipped_k = Vec::new();
    for (k, term) in terms.iter().enumerate().take(n - r + 1).skip(r) {
        match term {
            Some(t) => {
                if best.map_or(true, |(v, _)| *t > v) {
                    best = Some((*t, k));
                }
            }
            None => skipped_k.push(k),
        }
    }
    match best {
        Some((value, argmax_k)) => Ok(SplitStatistic { value, argmax_k, skipped_k }),
        None => Err(Error::NoFeasibleSplit { candidates: n + 1 - 2 * r }),
    }
}

/// The CUSUM statistic on the data as given (no recentering).
pub fn statistic(values: &[f64], config: &TestConfig) -> Result<SplitStatistic> {
    config.validate(values.len())?;
    let moments = engine_moments(values, config.family, config.gamma)?;
    let sides = side_estimates(&moments, config.family, config.r);
    maximize(&split_terms(&sides, config.target, config.r), config.r)
}

/// Pseudo-observations
/// `Y_{ν,i} = X_i ν{F(X_i)} + n⁻¹ Σ_j X_j ν′{F(X_j)} 1(X_i ≤ X_j)`
/// for the three weights of `family`, with `F` the shifted empirical c.d.f.
pub fn pseudo_observations(values: &[f64], family: WeightFamily, gamma: f64) -> Result<Vec<[f64; 3]>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let nf = n as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    // distinct values with their weights and the upper-tail sums of X ν′(F)
    let mut distinct = Vec::new();
    let mut weights = Vec::new();
    let mut masses = Vec::new();
    let mut start = 0;
    while start < n {
        let x = sorted[start];
        let mut end = start + 1;
        while end < n && sorted[end] == x {
            end += 1;
        }
        let f = (end as f64 + gamma) / nf;
        if family == WeightFamily::Gpwm && f <= 0.0 {
            return Err(Error::NonPositiveEcdf { value: f });
        }
        let dw = family.weight_derivatives(f);
        let count = (end - start) as f64;
        distinct.push(x);
        weights.push(family.weights(f));
        masses.push(dw.map(|d| count * x * d / nf));
        start = end;
    }
    let mut tail = vec![[0.0; 3]; distinct.len() + 1];
    for g in (0..distinct.len()).rev() {
        for c in 0..3 {
            tail[g][c] = tail[g + 1][c] + masses[g][c];
        }
    }
    Ok(values
        .iter()
        .map(|&x| {
            let g = distinct.partition_point(|&v| v < x);
            let w = weights[g];
            [x * w[0] + tail[g][0], x * w[1] + tail[g][1], x * w[2] + tail[g][2]]
        })
        .collect())
}

/// Covariance matrix of the pseudo-observation columns, normalized by `n`.
pub fn pseudo_covariance(y: &[[f64; 3]]) -> [[f64; 3]; 3] {
    let n = y.len() as f64;
    let mut mean = [0.0; 3];
    for row in y {
        for c in 0..3 {
            mean[c] += row[c] / n;
        }
    }
    let mut cov = [[0.0; 3]; 3];
    for row in y {
        for a in 0..3 {
            for b in a..3 {
                cov[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]) / n;
            }
        }
    }
    for a in 0..3 {
        for b in 0..a {
            cov[a][b] = cov[b][a];
        }
    }
    cov
}

fn quadratic_form(g: [f64; 3], cov: &[[f64; 3]; 3]) -> f64 {
    let mut s = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            s += g[a] * g[b] * cov[a][b];
        }
    }
    s
}

fn studentize(
    full: &MomentTriple,
    cov: &[[f64; 3]; 3],
    config: &TestConfig,
    n: usize,
) -> Result<(f64, f64)> {
    let grad = gev_maps::jacobian(config.family.map(), config.target, full)?;
    let correction = config.variance_correction.resolve(config.family, config.target, n);
    let var = quadratic_form(grad, cov) * correction;
    if !(var > 0.0 && var.is_finite()) {
        return Err(Error::DegenerateVariance(var));
    }
    Ok((libm::sqrt(var), correction))
}

/// Estimated standard deviation of the limiting statistic, on the data as
/// given (no recentering), including the configured correction factor.
pub fn sigma_hat(values: &[f64], config: &TestConfig) -> Result<f64> {
    config.validate(values.len())?;
    let full = full_sample_moments(values, config.family, config.gamma)?;
    let y = pseudo_observations(values, config.family.weights(), config.gamma)?;
    Ok(studentize(&full, &pseudo_covariance(&y), config, values.len())?.0)
}

/// Everything shared by the tests of one family on one sample.
struct Prepared {
    offset: f64,
    sides: SideEstimates,
    full: MomentTriple,
    cov: [[f64; 3]; 3],
}

fn prepare(sample: &Sample, config: &TestConfig) -> Result<Prepared> {
    let family = config.family;
    let offset = if config.recenter {
        location_offset(sample, family, config.gamma)?
    } else {
        0.0
    };
    let data: Vec<f64> = sample.iter().map(|x| x - offset).collect();
    let moments = engine_moments(&data, family, config.gamma)?;
    let sides = side_estimates(&moments, family, config.r);
    let full = full_sample_moments(&data, family, config.gamma)?;
    let y = pseudo_observations(&data, family.weights(), config.gamma)?;
    Ok(Prepared { offset, sides, full, cov: pseudo_covariance(&y) })
}

fn finish(prep: &Prepared, config: &TestConfig, n: usize) -> Result<TestResult> {
    let split = maximize(&split_terms(&prep.sides, config.target, config.r), config.r)?;
    let (sigma_hat, correction) = studentize(&prep.full, &prep.cov, config, n)?;
    let restore = |p: Option<[f64; 3]>| p.and_then(|p| GevParams::new(p[0] + prep.offset, p[1], p[2]).ok());
    Ok(TestResult {
        n,
        statistic: split.value,
        sigma_hat,
        p_value: p_value(split.value, sigma_hat),
        argmax_k: split.argmax_k,
        left_params: restore(prep.sides.left[split.argmax_k]),
        right_params: restore(prep.sides.right[split.argmax_k]),
        skipped_k: split.skipped_k,
        correction,
        offset: prep.offset,
    })
}

/// Runs one test: optional recentering, statistic, variance estimate and
/// asymptotic p-value.
pub fn run_test(sample: &Sample, config: &TestConfig) -> Result<TestResult> {
    run_battery(sample, core::slice::from_ref(config)).remove(0)
}

/// Runs several tests on the same sample, sharing the moment computations
/// between tests of the same family.
pub fn run_battery(sample: &Sample, configs: &[TestConfig]) -> Vec<Result<TestResult>> {
    let n = sample.len();
    let constant = sample.is_constant();
    let mut cache: Vec<((TestFamily, u64, bool, usize), Result<Prepared>)> = Vec::new();
    configs
        .iter()
        .map(|config| {
            config.validate(n)?;
            if constant {
                return Err(Error::ConstantSample);
            }
            let key = config.group_key();
            let idx = match cache.iter().position(|(k, _)| *k == key) {
                Some(i) => i,
                None => {
                    cache.push((key, prepare(sample, config)));
                    cache.len() - 1
                }
            };
            match &cache[idx].1 {
                Ok(prep) => finish(prep, config, n),
                Err(e) => Err(e.clone()),
            }
        })
        .collect()
}
