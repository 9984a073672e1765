//! Probability weighted moments (PWM) and generalized PWM (GPWM) estimated on
//! arbitrary subsamples, the PWM feasibility domain, and an engine that
//! evaluates the moments of every prefix and every suffix of a sample.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::distributions::GevParams;
use crate::error::{Error, Result};
use crate::gev_maps;
use crate::ratios::{gamma_one_ratio, pow_ratio};

/// Plotting-position constant customarily used with the PWM estimator.
pub const DEFAULT_PLOTTING_GAMMA: f64 = -0.35;

/// The triple of weight functions `ν₁, ν₂, ν₃` defining the moments
/// `E[X ν_i{F(X)}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WeightFamily {
    /// `1, x, x²`
    Pwm,
    /// `−x log x, x (log x)², −x² log x`
    Gpwm,
}

impl WeightFamily {
    #[inline]
    pub fn weights(self, x: f64) -> [f64; 3] {
        match self {
            WeightFamily::Pwm => [1.0, x, x * x],
            WeightFamily::Gpwm => {
                let l = libm::log(x);
                [-x * l, x * l * l, -x * x * l]
            }
        }
    }

    #[inline]
    pub fn weight_derivatives(self, x: f64) -> [f64; 3] {
        match self {
            WeightFamily::Pwm => [0.0, 1.0, 2.0 * x],
            WeightFamily::Gpwm => {
                let l = libm::log(x);
                [-l - 1.0, l * l + 2.0 * l, -2.0 * x * l - x]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Estimator {
    /// Plug-in estimator based on the shifted empirical c.d.f.
    BetaHat,
    /// Unbiased order-statistic estimator (PWM only).
    BHat,
    /// Population value.
    Exact,
}

impl Estimator {
    /// Smallest subsample on which the estimator is defined.
    pub fn min_size(self) -> usize {
        match self {
            Estimator::BHat => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MomentTriple {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub family: WeightFamily,
    pub estimator: Estimator,
    /// Plotting-position constant; only meaningful for [`Estimator::BetaHat`].
    pub gamma: f64,
}

impl MomentTriple {
    pub fn new(values: [f64; 3], family: WeightFamily, estimator: Estimator, gamma: f64) -> Self {
        MomentTriple {
            m1: values[0],
            m2: values[1],
            m3: values[2],
            family,
            estimator,
            gamma,
        }
    }

    pub fn pwm(values: [f64; 3]) -> Self {
        MomentTriple::new(values, WeightFamily::Pwm, Estimator::Exact, 0.0)
    }

    pub fn gpwm(values: [f64; 3]) -> Self {
        MomentTriple::new(values, WeightFamily::Gpwm, Estimator::Exact, 0.0)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.m1, self.m2, self.m3]
    }

    pub fn with_values(&self, values: [f64; 3]) -> Self {
        MomentTriple::new(values, self.family, self.estimator, self.gamma)
    }

    pub fn is_finite(&self) -> bool {
        self.m1.is_finite() && self.m2.is_finite() && self.m3.is_finite()
    }
}

/// The three strict inequalities defining the PWM feasibility domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DxiInequality {
    /// `2m₂ − m₁ > 0`
    Spread,
    /// `3m₃ − 2m₂ > 0`
    Upper,
    /// `−m₁ + 4m₂ − 3m₃ > 0`
    Curvature,
}

impl fmt::Display for DxiInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DxiInequality::Spread => "2*m2 - m1 > 0 violated",
            DxiInequality::Upper => "3*m3 - 2*m2 > 0 violated",
            DxiInequality::Curvature => "-m1 + 4*m2 - 3*m3 > 0 violated",
        })
    }
}

/// First violated feasibility inequality, if any.
pub fn dxi_violation(m: &MomentTriple) -> Option<DxiInequality> {
    if !(2.0 * m.m2 - m.m1 > 0.0) {
        Some(DxiInequality::Spread)
    } else if !(3.0 * m.m3 - 2.0 * m.m2 > 0.0) {
        Some(DxiInequality::Upper)
    } else if !(-m.m1 + 4.0 * m.m2 - 3.0 * m.m3 > 0.0) {
        Some(DxiInequality::Curvature)
    } else {
        None
    }
}

pub fn in_dxi(m: &MomentTriple) -> bool {
    dxi_violation(m).is_none()
}

/// Membership in the domain of the GPWM map: the shape equation is solved
/// numerically and the solution must have `ξ < 2`, `σ > 0` and finite `μ`.
pub fn in_dh(m: &MomentTriple) -> bool {
    m.family == WeightFamily::Gpwm && gev_maps::gpwm_to_gev_exact(m).is_ok()
}

/// Shifted empirical c.d.f. `(#{X_j ≤ x} + γ)/n`, not clamped to `[0, 1]`.
pub fn ecdf(values: &[f64], x: f64, gamma: f64) -> f64 {
    let count = values.iter().filter(|&&v| v <= x).count();
    (count as f64 + gamma) / values.len() as f64
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Plug-in estimator `β̂_i = n⁻¹ Σ_j X_j ν_i{F̂(X_j)}`.
pub fn beta_hat(values: &[f64], family: WeightFamily, gamma: f64) -> Result<MomentTriple> {
    let n = values.len();
    if n == 0 {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    let sorted = sorted_copy(values);
    let nf = n as f64;
    let mut acc = [0.0; 3];
    for &x in values {
        let count = sorted.partition_point(|&v| v <= x);
        let f = (count as f64 + gamma) / nf;
        if family == WeightFamily::Gpwm && f <= 0.0 {
            return Err(Error::NonPositiveEcdf { value: f });
        }
        let w = family.weights(f);
        for i in 0..3 {
            acc[i] += x * w[i];
        }
    }
    Ok(MomentTriple::new(
        acc.map(|a| a / nf),
        family,
        Estimator::BetaHat,
        gamma,
    ))
}

/// Unbiased estimator
/// `b̂_i = n⁻¹ Σ_j [Π_{m<i}(j − m) / Π_{m<i}(n − m)] X_(j)`.
pub fn b_hat(values: &[f64]) -> Result<MomentTriple> {
    let n = values.len();
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    let sorted = sorted_copy(values);
    let mut acc = [0.0; 3];
    for (idx, &x) in sorted.iter().enumerate() {
        let j = (idx + 1) as f64;
        for (i, a) in acc.iter_mut().enumerate() {
            let mut w = 1.0;
            for m in 1..=i {
                w *= (j - m as f64) / (n as f64 - m as f64);
            }
            *a += w * x;
        }
    }
    Ok(MomentTriple::new(
        acc.map(|a| a / n as f64),
        WeightFamily::Pwm,
        Estimator::BHat,
        0.0,
    ))
}

/// Population PWM of a GEV through `β_i = i⁻¹ E[max(X₁, …, X_i)]`, the
/// maximum of `i` copies being GEV(μ + σ(i^ξ − 1)/ξ, σ i^ξ, ξ).
pub fn exact_pwm_gev(p: &GevParams) -> Result<MomentTriple> {
    if !(p.xi < 1.0) {
        return Err(Error::ShapeTooLarge { xi: p.xi, limit: 1.0 });
    }
    // mean of GEV(μ, σ, ξ) is μ + σ (Γ(1 − ξ) − 1)/ξ
    let mean_ratio = gamma_one_ratio(p.xi).value;
    let mut out = [0.0; 3];
    for (idx, o) in out.iter_mut().enumerate() {
        let i = (idx + 1) as f64;
        let ln_i = libm::log(i);
        let loc = p.mu + p.sigma * pow_ratio(ln_i, p.xi).value;
        let scale = p.sigma * libm::exp(p.xi * ln_i);
        *o = (loc + scale * mean_ratio) / i;
    }
    Ok(MomentTriple::new(out, WeightFamily::Pwm, Estimator::Exact, 0.0))
}

/// Moment triples of every prefix `X₁…X_k` and every suffix `X_{k+1}…X_n`.
///
/// Both vectors have length `n + 1` and are indexed by the split point `k`:
/// `prefix[k]` describes the first `k` observations and `suffix[k]` the
/// remaining `n − k`. Entries where the estimator is undefined (subsample
/// too small, or a non-positive c.d.f. value under logarithmic weights) are
/// `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixSuffixMoments {
    pub prefix: Vec<Option<MomentTriple>>,
    pub suffix: Vec<Option<MomentTriple>>,
}

impl PrefixSuffixMoments {
    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_engine_args(n: usize, estimator: Estimator, family: WeightFamily) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    match (estimator, family) {
        (Estimator::Exact, _) => Err(Error::InvalidConfig(
            "prefix/suffix moments need a sample estimator".into(),
        )),
        (Estimator::BHat, WeightFamily::Gpwm) => Err(Error::InvalidConfig(
            "the unbiased estimator exists only for PWM weights".into(),
        )),
        _ => Ok(()),
    }
}

/// Incremental evaluation: the prefix (resp. suffix) is kept sorted by
/// insertion and each triple is read off the sorted buffer in one pass.
pub fn prefix_suffix_moments(
    values: &[f64],
    estimator: Estimator,
    family: WeightFamily,
    gamma: f64,
) -> Result<PrefixSuffixMoments> {
    let n = values.len();
    check_engine_args(n, estimator, family)?;
    let make = |m: [f64; 3]| MomentTriple::new(m, family, estimator, gamma);

    let mut prefix = vec![None; n + 1];
    let mut suffix = vec![None; n + 1];
    let mut sorted: Vec<f64> = Vec::with_capacity(n);
    for k in 1..=n {
        insert_sorted(&mut sorted, values[k - 1]);
        prefix[k] = eval_sorted(&sorted, estimator, family, gamma).map(make);
    }
    sorted.clear();
    for k in (0..n).rev() {
        insert_sorted(&mut sorted, values[k]);
        suffix[k] = eval_sorted(&sorted, estimator, family, gamma).map(make);
    }
    Ok(PrefixSuffixMoments { prefix, suffix })
}

/// Reference evaluation: re-runs the single-subsample estimator on every
/// prefix and suffix.
pub fn naive_prefix_suffix_moments(
    values: &[f64],
    estimator: Estimator,
    family: WeightFamily,
    gamma: f64,
) -> Result<PrefixSuffixMoments> {
    let n = values.len();
    check_engine_args(n, estimator, family)?;
    let single = |sub: &[f64]| -> Option<MomentTriple> {
        match estimator {
            Estimator::BHat => b_hat(sub).ok(),
            _ => beta_hat(sub, family, gamma).ok(),
        }
    };
    let prefix = (0..=n)
        .map(|k| if k == 0 { None } else { single(&values[..k]) })
        .collect();
    let suffix = (0..=n)
        .map(|k| if k == n { None } else { single(&values[k..]) })
        .collect();
    Ok(PrefixSuffixMoments { prefix, suffix })
}

fn insert_sorted(sorted: &mut Vec<f64>, x: f64) {
    let pos = sorted.partition_point(|&v| v <= x);
    sorted.insert(pos, x);
}

fn eval_sorted(
    sorted: &[f64],
    estimator: Estimator,
    family: WeightFamily,
    gamma: f64,
) -> Option<[f64; 3]> {
    let n = sorted.len();
    if n < estimator.min_size() {
        return None;
    }
    let nf = n as f64;
    match estimator {
        Estimator::BHat => {
            // Σ X_(j), Σ (j−1) X_(j), Σ (j−1)(j−2) X_(j)
            let mut s = [0.0; 3];
            for (idx, &x) in sorted.iter().enumerate() {
                let a = idx as f64;
                s[0] += x;
                s[1] += a * x;
                s[2] += a * (a - 1.0) * x;
            }
            Some([
                s[0] / nf,
                s[1] / (nf * (nf - 1.0)),
                s[2] / (nf * (nf - 1.0) * (nf - 2.0)),
            ])
        }
        _ => {
            let mut acc = [0.0; 3];
            let mut start = 0;
            while start < n {
                let x = sorted[start];
                let mut end = start + 1;
                while end < n && sorted[end] == x {
                    end += 1;
                }
                let f = (end as f64 + gamma) / nf;
                if family == WeightFamily::Gpwm && f <= 0.0 {
                    return None;
                }
                let w = family.weights(f);
                let mass = x * (end - start) as f64;
                for i in 0..3 {
                    acc[i] += mass * w[i];
                }
                start = end;
            }
            Some(acc.map(|a| a / nf))
        }
    }
}
