use alloc::string::String;

use thiserror::Error;

use crate::moments::DxiInequality;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` is invalid: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("probability {0} outside the open unit interval")]
    InvalidProbability(f64),
    #[error("Gamma function evaluated at a pole or non-finite point: {0}")]
    GammaPole(f64),
    #[error("sample is empty")]
    EmptySample,
    #[error("observation {index} is not finite")]
    NonFiniteObservation { index: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("empirical c.d.f. value {value} is not positive; the logarithmic weights are undefined")]
    NonPositiveEcdf { value: f64 },
    #[error("moment triple outside the PWM feasibility domain: {0}")]
    OutsideDxi(DxiInequality),
    #[error("moment triple outside the domain of the {map} map: {reason}")]
    OutsideDomain { map: &'static str, reason: &'static str },
    #[error("no root of the {map} shape equation in the search bracket")]
    NoRoot { map: &'static str },
    #[error("shape parameter {xi} too large for finite moments (must be below {limit})")]
    ShapeTooLarge { xi: f64, limit: f64 },
    #[error("all {candidates} candidate split points were infeasible")]
    NoFeasibleSplit { candidates: usize },
    #[error("estimated variance {0} is not positive; data are numerically degenerate")]
    DegenerateVariance(f64),
    #[error("sample is constant")]
    ConstantSample,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
