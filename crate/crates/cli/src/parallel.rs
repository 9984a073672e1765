//! Replicate-level parallelism. Replicates are seeded by index and collected
//! in index order, so results do not depend on the number of workers.

use bmcusum_core::cusum::TestConfig;
use bmcusum_core::detie::{assemble_report, run_detie_replicate, tie_step, DetieReport};
use bmcusum_core::montecarlo::{aggregate, run_replicate, Scenario, SimReport};
use bmcusum_core::{Error, Result, Sample};
use rayon::prelude::*;

pub const JOBS_ENV: &str = "BMCUSUM_JOBS";

/// Worker count from the flag, then the environment, then the machine.
pub fn resolve_jobs(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var(JOBS_ENV).ok()?.trim().parse().ok())
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool")
}

pub fn run_scenario(scenario: &Scenario, jobs: usize) -> Result<SimReport> {
    scenario.validate()?;
    let outcomes: Vec<_> = pool(jobs).install(|| {
        (0..scenario.replications as u64)
            .into_par_iter()
            .map(|i| run_replicate(scenario, i))
            .collect()
    });
    Ok(aggregate(scenario, &outcomes))
}

/// Runs several scenarios, sharing one pool across all their replicates.
pub fn run_scenarios(scenarios: &[Scenario], jobs: usize) -> Result<Vec<SimReport>> {
    scenarios.iter().try_for_each(Scenario::validate)?;
    let tasks: Vec<(usize, u64)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(s, sc)| (0..sc.replications as u64).map(move |i| (s, i)))
        .collect();
    let outcomes: Vec<_> = pool(jobs).install(|| {
        tasks.par_iter().map(|&(s, i)| run_replicate(&scenarios[s], i)).collect()
    });
    let mut rest = &outcomes[..];
    Ok(scenarios
        .iter()
        .map(|sc| {
            let (mine, tail) = rest.split_at(sc.replications);
            rest = tail;
            aggregate(sc, mine)
        })
        .collect())
}

pub fn detie_report(
    sample: &Sample,
    replications: usize,
    tests: &[TestConfig],
    master_seed: u64,
    jobs: usize,
) -> Result<DetieReport> {
    if replications == 0 {
        return Err(Error::InvalidConfig("replications must be at least 1".into()));
    }
    let d = tie_step(sample)?;
    let replicates = pool(jobs).install(|| {
        (0..replications as u64)
            .into_par_iter()
            .map(|i| run_detie_replicate(sample, d, tests, master_seed, i))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(assemble_report(sample, d, tests, master_seed, replicates))
}
