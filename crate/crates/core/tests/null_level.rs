use bmcusum_core::baselines::{mean_cusum, variance_cusum};
use bmcusum_core::montecarlo::{run_scenario, Generator, Law, Scenario, TestSpec};
use bmcusum_core::BaseDistribution;

fn normal_null(replications: usize, tests: Vec<TestSpec>) -> Scenario {
    Scenario {
        name: "normal null".into(),
        n: 400,
        generator: Generator::Null { law: Law { base: BaseDistribution::Normal { mean: 0.0, sd: 1.0 }, block_size: 1 } },
        replications,
        level: 0.05,
        tests,
        master_seed: 5,
    }
}

#[test]
fn mean_cusum_holds_its_level() {
    let report = run_scenario(&normal_null(2000, vec![TestSpec::Mean { r: 10 }])).unwrap();
    let pct = report.tests[0].rejection_pct;
    assert!((3.0..=7.0).contains(&pct), "{pct}%");
    assert_eq!(report.tests[0].failures, 0);
}

#[test]
fn variance_cusum_is_not_wildly_miscalibrated() {
    let report = run_scenario(&normal_null(1000, vec![TestSpec::Variance { r: 10 }])).unwrap();
    let pct = report.tests[0].rejection_pct;
    assert!((2.0..=8.0).contains(&pct), "{pct}%");
}

#[test]
fn baselines_agree_with_the_scenario_runner() {
    let scenario = normal_null(5, vec![TestSpec::Mean { r: 10 }, TestSpec::Variance { r: 10 }]);
    let report = run_scenario(&scenario).unwrap();
    let mut rejections = [0usize; 2];
    for i in 0..5 {
        let mut rng = bmcusum_core::montecarlo::replicate_rng(5, "normal null", i);
        let s = scenario.generator.generate(400, &mut rng).unwrap();
        rejections[0] += usize::from(mean_cusum(&s, 10).unwrap().p_value < 0.05);
        rejections[1] += usize::from(variance_cusum(&s, 10).unwrap().p_value < 0.05);
    }
    assert_eq!(report.tests[0].rejections, rejections[0]);
    assert_eq!(report.tests[1].rejections, rejections[1]);
}
