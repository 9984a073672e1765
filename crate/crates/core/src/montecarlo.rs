//! Scenario-driven Monte Carlo estimation of rejection rates.
//!
//! Each replicate draws one sample from the scenario's generator and runs
//! every configured test on it. Replicate `i` is seeded from a hash of the
//! master seed, the scenario name and `i`, so results do not depend on the
//! order in which replicates are evaluated.

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::baselines::{mean_cusum, variance_cusum};
use crate::cusum::{run_battery, TestConfig, TestResult};
use crate::distributions::{BaseDistribution, GevParams};
use crate::error::{Error, Result};
use crate::sample::Sample;

/// Block maxima of a base law; block size 1 gives draws from the base law.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Law {
    pub base: BaseDistribution,
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub block_size: usize,
}

#[cfg(feature = "serde")]
fn one() -> usize {
    1
}

impl Law {
    pub fn gev(p: GevParams) -> Self {
        Law { base: BaseDistribution::gev(p), block_size: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(Error::InvalidConfig("block size must be at least 1".into()));
        }
        self.base.validate()
    }

    fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        (0..self.block_size)
            .map(|_| self.base.sample(rng))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Generator {
    /// Independent draws from one law.
    Null { law: Law },
    /// The first `⌊nt⌋` observations from `before`, the rest from `after`.
    Change { before: Law, after: Law, t: f64 },
}

impl Generator {
    pub fn validate(&self) -> Result<()> {
        match self {
            Generator::Null { law } => law.validate(),
            Generator::Change { before, after, t } => {
                if !(*t > 0.0 && *t < 1.0) {
                    return Err(Error::InvalidConfig(alloc::format!(
                        "change fraction t = {t} must lie strictly between 0 and 1"
                    )));
                }
                before.validate()?;
                after.validate()
            }
        }
    }

    pub fn generate<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Sample> {
        let values = match self {
            Generator::Null { law } => (0..n).map(|_| law.draw(rng)).collect(),
            Generator::Change { before, after, t } => {
                let split = libm::floor(n as f64 * t) as usize;
                (0..n)
                    .map(|i| if i < split { before.draw(rng) } else { after.draw(rng) })
                    .collect::<Vec<f64>>()
            }
        };
        Sample::new(values)
    }
}

/// A test run on every replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "test", rename_all = "snake_case"))]
pub enum TestSpec {
    Gev(TestConfig),
    Mean { r: usize },
    Variance { r: usize },
}

impl TestSpec {
    pub fn label(&self) -> String {
        match self {
            TestSpec::Gev(c) => alloc::format!("{}:{}", c.family, c.target),
            TestSpec::Mean { .. } => "mean".into(),
            TestSpec::Variance { .. } => "variance".into(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            TestSpec::Gev(c) => c.validate(n),
            TestSpec::Mean { r } | TestSpec::Variance { r } => {
                if *r == 0 || n < 2 * r {
                    return Err(Error::InvalidConfig(alloc::format!(
                        "trim r = {r} is incompatible with n = {n}"
                    )));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub generator: Generator,
    pub replications: usize,
    #[cfg_attr(feature = "serde", serde(default = "default_level"))]
    pub level: f64,
    pub tests: Vec<TestSpec>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub master_seed: u64,
}

#[cfg(feature = "serde")]
fn default_level() -> f64 {
    0.05
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "level {} must lie strictly between 0 and 1",
                self.level
            )));
        }
        if self.tests.is_empty() {
            return Err(Error::InvalidConfig("no tests configured".into()));
        }
        self.generator.validate()?;
        self.tests.iter().try_for_each(|t| t.validate(self.n))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `index`: a hash of the master seed, a stream name and
/// the index.
pub fn replicate_seed(master_seed: u64, name: &str, index: u64) -> u64 {
    // FNV-1a over the name
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(master_seed ^ h).wrapping_add(index))
}

pub fn replicate_rng(master_seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replicate_seed(master_seed, name, index))
}

/// Result of one test on one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Decided { rejected: bool, skipped_splits: usize },
    /// The test could not be carried out; counted as a non-rejection.
    Failed,
}

/// Runs every test of `specs` on `sample` at significance `level`.
pub fn evaluate_tests(sample: &Sample, specs: &[TestSpec], level: f64) -> Vec<Outcome> {
    let gev: Vec<TestConfig> = specs
        .iter()
        .filter_map(|s| match s {
            TestSpec::Gev(c) => Some(*c),
            _ => None,
        })
        .collect();
    let mut battery = run_battery(sample, &gev).into_iter();
    let decide = |r: Result<TestResult>| match r {
        Ok(r) => Outcome::Decided { rejected: r.p_value < level, skipped_splits: r.skipped_k.len() },
        Err(_) => Outcome::Failed,
    };
    specs
        .iter()
        .map(|s| match s {
            TestSpec::Gev(_) => decide(battery.next().expect("one result per configuration")),
            TestSpec::Mean { r } => decide(mean_cusum(sample, *r)),
            TestSpec::Variance { r } => decide(variance_cusum(sample, *r)),
        })
        .collect()
}

/// Generates replicate `index` of the scenario and runs its tests.
pub fn run_replicate(scenario: &Scenario, index: u64) -> Vec<Outcome> {
    let mut rng = replicate_rng(scenario.master_seed, &scenario.name, index);
    match scenario.generator.generate(scenario.n, &mut rng) {
        Ok(sample) => evaluate_tests(&sample, &scenario.tests, scenario.level),
        Err(_) => alloc::vec![Outcome::Failed; scenario.tests.len()],
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TestSummary {
    pub test: String,
    pub rejections: usize,
    pub failures: usize,
    /// Percentage of replicates rejecting the null.
    pub rejection_pct: f64,
    /// Monte Carlo standard error of `rejection_pct`, in percentage points.
    pub mc_se_pct: f64,
    /// Total number of splits discarded by feasibility indicators.
    pub skipped_splits: usize,
    /// Number of replicates in which at least one split was discarded.
    pub replicates_with_skips: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SimReport {
    pub scenario: String,
    pub n: usize,
    pub replications: usize,
    pub level: f64,
    pub master_seed: u64,
    pub tests: Vec<TestSummary>,
}

/// Reduces per-replicate outcomes, given in replicate order.
pub fn aggregate(scenario: &Scenario, outcomes: &[Vec<Outcome>]) -> SimReport {
    let reps = outcomes.len();
    let tests = scenario
        .tests
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            let mut s = TestSummary {
                test: spec.label(),
                rejections: 0,
                failures: 0,
                rejection_pct: 0.0,
                mc_se_pct: 0.0,
                skipped_splits: 0,
                replicates_with_skips: 0,
            };
            for row in outcomes {
                match row[j] {
                    Outcome::Decided { rejected, skipped_splits } => {
                        s.rejections += usize::from(rejected);
                        s.skipped_splits += skipped_splits;
                        s.replicates_with_skips += usize::from(skipped_splits > 0);
                    }
                    Outcome::Failed => s.failures += 1,
                }
            }
            if reps > 0 {
                let p = s.rejections as f64 / reps as f64;
                s.rejection_pct = 100.0 * p;
                s.mc_se_pct = 100.0 * libm::sqrt(p * (1.0 - p) / reps as f64);
            }
            s
        })
        .collect();
    SimReport {
        scenario: scenario.name.clone(),
        n: scenario.n,
        replications: reps,
        level: scenario.level,
        master_seed: scenario.master_seed,
        tests,
    }
}

/// Runs all replicates sequentially.
pub fn run_scenario(scenario: &Scenario) -> Result<SimReport> {
    scenario.validate()?;
    let outcomes: Vec<Vec<Outcome>> = (0..scenario.replications as u64)
        .map(|i| run_replicate(scenario, i))
        .collect();
    Ok(aggregate(scenario, &outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusum::TestFamily;
    use crate::gev_maps::Parameter;
    use alloc::vec;

    fn null_scenario(reps: usize) -> Scenario {
        Scenario {
            name: "null".into(),
            n: 60,
            generator: Generator::Null { law: Law::gev(GevParams::standard(0.0).unwrap()) },
            replications: reps,
            level: 0.05,
            tests: vec![
                TestSpec::Gev(TestConfig::new(TestFamily::PwmT, Parameter::Mu)),
                TestSpec::Mean { r: 10 },
            ],
            master_seed: 42,
        }
    }

    #[test]
    fn seeds_depend_on_every_input() {
        let a = replicate_seed(1, "x", 0);
        assert_ne!(a, replicate_seed(2, "x", 0));
        assert_ne!(a, replicate_seed(1, "y", 0));
        assert_ne!(a, replicate_seed(1, "x", 1));
        assert_eq!(a, replicate_seed(1, "x", 0));
    }

    #[test]
    fn reports_are_deterministic() {
        let s = null_scenario(20);
        assert_eq!(run_scenario(&s).unwrap(), run_scenario(&s).unwrap());
    }

    #[test]
    fn replicate_order_does_not_matter() {
        let s = null_scenario(10);
        let forward: Vec<_> = (0..10).map(|i| run_replicate(&s, i)).collect();
        let mut backward: Vec<_> = (0..10).rev().map(|i| run_replicate(&s, i)).collect();
        backward.reverse();
        assert_eq!(forward, backward);
    }

    #[test]
    fn single_replicate_is_all_or_nothing() {
        let r = run_scenario(&null_scenario(1)).unwrap();
        for t in &r.tests {
            assert!(t.rejection_pct == 0.0 || t.rejection_pct == 100.0);
            assert_eq!(t.mc_se_pct, 0.0);
        }
    }

    #[test]
    fn change_generator_splits_at_floor() {
        let g = Generator::Change {
            before: Law::gev(GevParams::new(0.0, 1.0, 0.0).unwrap()),
            after: Law::gev(GevParams::new(1000.0, 1.0, 0.0).unwrap()),
            t: 0.25,
        };
        let mut rng = replicate_rng(0, "c", 0);
        let s = g.generate(10, &mut rng).unwrap();
        assert!(s[..2].iter().all(|&x| x < 100.0));
        assert!(s[2..].iter().all(|&x| x > 900.0));
    }

    #[test]
    fn validation() {
        let mut s = null_scenario(0);
        assert!(s.validate().is_err());
        s.replications = 5;
        assert!(s.validate().is_ok());
        s.generator = Generator::Change {
            before: Law::gev(GevParams::standard(0.0).unwrap()),
            after: Law::gev(GevParams::standard(0.0).unwrap()),
            t: 1.0,
        };
        assert!(s.validate().is_err());
        let mut s = null_scenario(5);
        s.n = 15;
        assert!(s.validate().is_err());
        let mut s = null_scenario(5);
        s.tests.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn standard_error_formula() {
        let s = null_scenario(4);
        let rows = vec![
            vec![Outcome::Decided { rejected: true, skipped_splits: 0 }, Outcome::Failed],
            vec![Outcome::Decided { rejected: false, skipped_splits: 3 }, Outcome::Failed],
            vec![Outcome::Decided { rejected: false, skipped_splits: 0 }, Outcome::Failed],
            vec![Outcome::Decided { rejected: false, skipped_splits: 1 }, Outcome::Failed],
        ];
        let r = aggregate(&s, &rows);
        assert_eq!(r.tests[0].rejection_pct, 25.0);
        assert!((r.tests[0].mc_se_pct - 100.0 * libm::sqrt(0.25 * 0.75 / 4.0)).abs() < 1e-12);
        assert_eq!(r.tests[0].skipped_splits, 4);
        assert_eq!(r.tests[0].replicates_with_skips, 2);
        assert_eq!(r.tests[1].failures, 4);
        assert_eq!(r.tests[1].rejection_pct, 0.0);
    }
}
