//! Removal of ties caused by limited measurement precision: every
//! observation receives an independent `U(0, d)` perturbation, `d` being the
//! smallest gap between distinct values, and the tests are repeated over
//! many perturbed copies of the data.
//!
//! Reported estimates come from the unbiased moments `b̂`. Published
//! summaries of this procedure sometimes label the same columns with `β̂`.

use alloc::vec::Vec;

use rand::distr::Open01;
use rand::Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::cusum::{run_battery, TestConfig};
use crate::distributions::GevParams;
use crate::error::{Error, Result};
use crate::gev_maps::pwm_to_gev_approx;
use crate::moments::b_hat;
use crate::montecarlo::replicate_rng;
use crate::sample::Sample;

const STREAM: &str = "detie";

/// Smallest difference between two distinct observations.
pub fn tie_step(values: &[f64]) -> Result<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 0.0)
        .fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.min(g))))
        .ok_or(Error::ConstantSample)
}

/// Adds an independent draw from the open interval `(0, d)` to every
/// observation.
pub fn detie_replicate<R: Rng + ?Sized>(sample: &Sample, d: f64, rng: &mut R) -> Result<Sample> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter { name: "d", value: d });
    }
    Sample::new(
        sample
            .iter()
            .map(|x| {
                let u: f64 = rng.sample(Open01);
                x + d * u
            })
            .collect(),
    )
}

/// Tests and estimates on one perturbed copy of the data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DetieReplicate {
    /// One entry per configured test; `None` when the test failed.
    pub p_values: Vec<Option<f64>>,
    /// Approximate PWM estimates from `b̂` of the whole perturbed sample.
    pub estimate: Option<GevParams>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Envelope {
    pub min: f64,
    pub max: f64,
}

impl Envelope {
    fn of(values: impl Iterator<Item = f64>) -> Option<Envelope> {
        values.fold(None, |e, v| {
            Some(match e {
                None => Envelope { min: v, max: v },
                Some(Envelope { min, max }) => Envelope { min: min.min(v), max: max.max(v) },
            })
        })
    }

    pub fn contains(&self, other: &Envelope) -> bool {
        self.min <= other.min && other.max <= self.max
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DetieReport {
    pub n: usize,
    pub n_distinct: usize,
    pub d: f64,
    pub master_seed: u64,
    pub tests: Vec<TestConfig>,
    pub replicates: Vec<DetieReplicate>,
    /// Range of each test's p-values over the successful replicates.
    pub p_value_envelopes: Vec<Option<Envelope>>,
    /// Number of replicates on which each test failed.
    pub failures: Vec<usize>,
    pub mu_envelope: Option<Envelope>,
    pub sigma_envelope: Option<Envelope>,
    pub xi_envelope: Option<Envelope>,
}

/// Perturbs the data with the generator of replicate `index` and evaluates
/// the tests and the estimates.
pub fn run_detie_replicate(
    sample: &Sample,
    d: f64,
    tests: &[TestConfig],
    master_seed: u64,
    index: u64,
) -> Result<DetieReplicate> {
    let mut rng = replicate_rng(master_seed, STREAM, index);
    let jittered = detie_replicate(sample, d, &mut rng)?;
    let p_values = run_battery(&jittered, tests)
        .into_iter()
        .map(|r| r.ok().map(|r| r.p_value))
        .collect();
    let estimate = b_hat(&jittered).and_then(|m| pwm_to_gev_approx(&m)).ok();
    Ok(DetieReplicate { p_values, estimate })
}

/// Collects replicates, given in index order, into a report.
pub fn assemble_report(
    sample: &Sample,
    d: f64,
    tests: &[TestConfig],
    master_seed: u64,
    replicates: Vec<DetieReplicate>,
) -> DetieReport {
    let p_value_envelopes = (0..tests.len())
        .map(|j| Envelope::of(replicates.iter().filter_map(|r| r.p_values[j])))
        .collect();
    let failures = (0..tests.len())
        .map(|j| replicates.iter().filter(|r| r.p_values[j].is_none()).count())
        .collect();
    let estimates = || replicates.iter().filter_map(|r| r.estimate);
    DetieReport {
        n: sample.len(),
        n_distinct: sample.distinct_count(),
        d,
        master_seed,
        tests: tests.to_vec(),
        p_value_envelopes,
        failures,
        mu_envelope: Envelope::of(estimates().map(|p| p.mu)),
        sigma_envelope: Envelope::of(estimates().map(|p| p.sigma)),
        xi_envelope: Envelope::of(estimates().map(|p| p.xi)),
        replicates,
    }
}

/// Runs the de-tying protocol sequentially over `replications` copies.
pub fn detie_report(
    sample: &Sample,
    replications: usize,
    tests: &[TestConfig],
    master_seed: u64,
) -> Result<DetieReport> {
    if replications == 0 {
        return Err(Error::InvalidConfig("replications must be at least 1".into()));
    }
    let d = tie_step(sample)?;
    let replicates = (0..replications as u64)
        .map(|i| run_detie_replicate(sample, d, tests, master_seed, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_report(sample, d, tests, master_seed, replicates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusum::TestFamily;
    use crate::distributions::sample_gev;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tie_step_examples() {
        assert_eq!(tie_step(&[1.0, 2.0, 2.0, 3.0]).unwrap(), 1.0);
        assert!((tie_step(&[0.0, 0.1, 0.25]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(tie_step(&[5.0, 5.0]), Err(Error::ConstantSample));
    }

    #[test]
    fn jitter_breaks_ties_within_bounds() {
        let s = Sample::new(vec![1.0, 1.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let j = detie_replicate(&s, 1.0, &mut rng).unwrap();
            assert_eq!(j.distinct_count(), 3);
            for (x, y) in s.iter().zip(j.iter()) {
                assert!(*y > *x && *y < x + 1.0);
            }
        }
        assert!(detie_replicate(&s, 0.0, &mut rng).is_err());
    }

    #[test]
    fn sorted_values_move_less_than_step() {
        let s = Sample::new(vec![3.0, 1.0, 2.0, 2.0, 1.5, 3.0]).unwrap();
        let d = tie_step(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let j = detie_replicate(&s, d, &mut rng).unwrap();
        let mut a = s.values().to_vec();
        let mut b = j.values().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((y - x).abs() < d);
        }
    }

    fn rounded_sample() -> Sample {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_gev(60, &GevParams::new(10.0, 2.0, -0.1).unwrap(), &mut rng).unwrap();
        Sample::new(s.iter().map(|x| libm::round(x * 2.0) / 2.0).collect()).unwrap()
    }

    #[test]
    fn single_replicate_envelope_is_degenerate() {
        let tests = TestConfig::triple(TestFamily::PwmT);
        let r = detie_report(&rounded_sample(), 1, &tests, 7).unwrap();
        for e in r.p_value_envelopes.iter().flatten() {
            assert_eq!(e.min, e.max);
        }
        let mu = r.mu_envelope.unwrap();
        assert_eq!(mu.min, mu.max);
        assert_eq!(r.n, 60);
        assert!(r.n_distinct < 60);
    }

    #[test]
    fn envelopes_nest_as_replicates_grow() {
        let tests = TestConfig::triple(TestFamily::PwmT);
        let s = rounded_sample();
        let small = detie_report(&s, 20, &tests, 11).unwrap();
        let large = detie_report(&s, 60, &tests, 11).unwrap();
        assert_eq!(small.replicates[..], large.replicates[..20]);
        for (a, b) in small.p_value_envelopes.iter().zip(large.p_value_envelopes.iter()) {
            assert!(b.unwrap().contains(&a.unwrap()));
        }
        assert!(large.xi_envelope.unwrap().contains(&small.xi_envelope.unwrap()));
    }

    #[test]
    fn tie_free_sample_stays_close_to_raw_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = sample_gev(80, &GevParams::standard(0.0).unwrap(), &mut rng).unwrap();
        let cfg = TestConfig::new(TestFamily::PwmT, crate::gev_maps::Parameter::Mu);
        let raw = crate::cusum::run_test(&s, &cfg).unwrap().p_value;
        let r = detie_report(&s, 1, &[cfg], 5).unwrap();
        let p = r.replicates[0].p_values[0].unwrap();
        assert!((p - raw).abs() < 0.05, "{p} vs {raw}");
    }
}
