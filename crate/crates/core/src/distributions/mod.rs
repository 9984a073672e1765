//! Distribution functions and random generation for the laws used by the
//! tests and the simulation harness.
//!
//! All samplers draw through inverse transforms of `Open01` uniforms except
//! the absolute Student-t, which uses the ratio construction from
//! `rand_distr`. Given the same generator state every sampler is
//! deterministic.

mod special;

use alloc::vec::Vec;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, StudentT};
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

pub use special::{
    digamma, gamma_fn, incomplete_beta, kolmogorov_cdf, ln_gamma, normal_cdf, normal_quantile,
    EULER_GAMMA,
};
pub(crate) use special::gamma_unchecked;

/// Below this magnitude the shape parameter is treated as exactly zero in
/// the c.d.f. and quantile function.
pub const XI_ZERO_THRESHOLD: f64 = 1e-8;

/// Location, scale and shape of a generalized extreme value distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GevParams {
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
}

impl GevParams {
    pub fn new(mu: f64, sigma: f64, xi: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter { name: "mu", value: mu });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter { name: "sigma", value: sigma });
        }
        if !xi.is_finite() {
            return Err(Error::InvalidParameter { name: "xi", value: xi });
        }
        Ok(GevParams { mu, sigma, xi })
    }

    pub fn standard(xi: f64) -> Result<Self> {
        GevParams::new(0.0, 1.0, xi)
    }

    /// Finite end point of the support: the upper one when `xi < 0`, the
    /// lower one when `xi > 0`.
    pub fn endpoint(&self) -> Option<f64> {
        if self.xi.abs() < XI_ZERO_THRESHOLD {
            None
        } else {
            Some(self.mu - self.sigma / self.xi)
        }
    }
}

/// Generalized Pareto distribution with location 0.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GpdParams {
    pub sigma: f64,
    pub xi: f64,
}

impl GpdParams {
    pub fn new(sigma: f64, xi: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter { name: "sigma", value: sigma });
        }
        if !xi.is_finite() {
            return Err(Error::InvalidParameter { name: "xi", value: xi });
        }
        Ok(GpdParams { sigma, xi })
    }
}

/// GEV c.d.f. `exp{−(1 + ξ(x − μ)/σ)_+^{−1/ξ}}`, with the Gumbel form when
/// `|ξ|` is below [`XI_ZERO_THRESHOLD`].
pub fn gev_cdf(x: f64, p: &GevParams) -> f64 {
    let z = (x - p.mu) / p.sigma;
    if p.xi.abs() < XI_ZERO_THRESHOLD {
        return libm::exp(-libm::exp(-z));
    }
    let t = p.xi * z;
    if t <= -1.0 {
        return if p.xi > 0.0 { 0.0 } else { 1.0 };
    }
    libm::exp(-libm::exp(-libm::log1p(t) / p.xi))
}

/// Inverse of [`gev_cdf`] on `(0, 1)`.
pub fn gev_quantile(u: f64, p: &GevParams) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidProbability(u));
    }
    Ok(gev_quantile_unchecked(u, p))
}

fn gev_quantile_unchecked(u: f64, p: &GevParams) -> f64 {
    let y = -libm::log(u);
    if p.xi.abs() < XI_ZERO_THRESHOLD {
        p.mu - p.sigma * libm::log(y)
    } else {
        p.mu + p.sigma * libm::expm1(-p.xi * libm::log(y)) / p.xi
    }
}

/// `n` independent GEV draws by inversion.
pub fn sample_gev<R: Rng + ?Sized>(n: usize, p: &GevParams, rng: &mut R) -> Result<Sample> {
    if n == 0 {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    let values = (0..n)
        .map(|_| gev_quantile_unchecked(rng.sample(Open01), p))
        .collect();
    Sample::new(values)
}

/// Laws from which block maxima can be built.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "law", rename_all = "snake_case"))]
pub enum BaseDistribution {
    Gev { mu: f64, sigma: f64, xi: f64 },
    Gpd { sigma: f64, xi: f64 },
    /// Absolute value of a standard Student-t with `df` degrees of freedom.
    AbsStudentT { df: f64 },
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
}

impl BaseDistribution {
    pub fn gev(p: GevParams) -> Self {
        BaseDistribution::Gev { mu: p.mu, sigma: p.sigma, xi: p.xi }
    }

    pub fn gpd(p: GpdParams) -> Self {
        BaseDistribution::Gpd { sigma: p.sigma, xi: p.xi }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BaseDistribution::Gev { mu, sigma, xi } => GevParams::new(mu, sigma, xi).map(|_| ()),
            BaseDistribution::Gpd { sigma, xi } => GpdParams::new(sigma, xi).map(|_| ()),
            BaseDistribution::AbsStudentT { df } => {
                if df.is_finite() && df > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter { name: "df", value: df })
                }
            }
            BaseDistribution::Normal { mean, sd } => {
                if !mean.is_finite() {
                    Err(Error::InvalidParameter { name: "mean", value: mean })
                } else if !(sd.is_finite() && sd > 0.0) {
                    Err(Error::InvalidParameter { name: "sd", value: sd })
                } else {
                    Ok(())
                }
            }
            BaseDistribution::Exponential { rate } => {
                if rate.is_finite() && rate > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter { name: "rate", value: rate })
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            BaseDistribution::Gev { mu, sigma, xi } => gev_cdf(x, &GevParams { mu, sigma, xi }),
            BaseDistribution::Gpd { sigma, xi } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let z = x / sigma;
                if xi.abs() < XI_ZERO_THRESHOLD {
                    -libm::expm1(-z)
                } else if xi * z <= -1.0 {
                    1.0
                } else {
                    -libm::expm1(-libm::log1p(xi * z) / xi)
                }
            }
            BaseDistribution::AbsStudentT { df } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - incomplete_beta(df / (df + x * x), 0.5 * df, 0.5)
                }
            }
            BaseDistribution::Normal { mean, sd } => normal_cdf((x - mean) / sd),
            BaseDistribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -libm::expm1(-rate * x)
                }
            }
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidProbability(u));
        }
        Ok(match *self {
            BaseDistribution::Gev { mu, sigma, xi } => {
                gev_quantile_unchecked(u, &GevParams { mu, sigma, xi })
            }
            BaseDistribution::Gpd { sigma, xi } => gpd_quantile(u, sigma, xi),
            BaseDistribution::AbsStudentT { .. } => self.quantile_by_bisection(u),
            BaseDistribution::Normal { mean, sd } => mean + sd * normal_quantile(u),
            BaseDistribution::Exponential { rate } => -libm::log1p(-u) / rate,
        })
    }

    fn quantile_by_bisection(&self, u: f64) -> f64 {
        let mut hi = 1.0;
        while self.cdf(hi) < u {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// One draw. The parameters are assumed valid (see [`Self::validate`]).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            BaseDistribution::Gev { mu, sigma, xi } => {
                gev_quantile_unchecked(rng.sample(Open01), &GevParams { mu, sigma, xi })
            }
            BaseDistribution::Gpd { sigma, xi } => gpd_quantile(rng.sample(Open01), sigma, xi),
            BaseDistribution::AbsStudentT { df } => {
                let t = StudentT::new(df).expect("validated degrees of freedom");
                let x: f64 = t.sample(rng);
                x.abs()
            }
            BaseDistribution::Normal { mean, sd } => {
                mean + sd * normal_quantile(rng.sample(Open01))
            }
            BaseDistribution::Exponential { rate } => {
                let u: f64 = rng.sample(Open01);
                -libm::log1p(-u) / rate
            }
        }
    }
}

fn gpd_quantile(u: f64, sigma: f64, xi: f64) -> f64 {
    let y = -libm::log1p(-u);
    if xi.abs() < XI_ZERO_THRESHOLD {
        sigma * y
    } else {
        sigma * libm::expm1(xi * y) / xi
    }
}

/// `n_blocks` maxima, each over `block_size` fresh draws from `base`.
pub fn sample_block_maxima<R: Rng + ?Sized>(
    n_blocks: usize,
    block_size: usize,
    base: &BaseDistribution,
    rng: &mut R,
) -> Result<Sample> {
    if n_blocks == 0 {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    if block_size == 0 {
        return Err(Error::InvalidConfig("block size must be at least 1".into()));
    }
    base.validate()?;
    let values: Vec<f64> = (0..n_blocks)
        .map(|_| {
            (0..block_size)
                .map(|_| base.sample(rng))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Sample::new(values)
}
