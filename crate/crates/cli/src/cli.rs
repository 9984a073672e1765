//! Argument parsing and the four commands.
//!
//! Exit codes: 0 on success, 2 for unreadable data or invalid arguments, 3
//! when the data fall outside the domain of an estimator or test.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bmcusum_core::cusum::{run_battery, TestConfig, TestFamily, DEFAULT_TRIM};
use bmcusum_core::detie::{detie_replicate, tie_step};
use bmcusum_core::gev_maps::{self, Parameter};
use bmcusum_core::moments::{b_hat, beta_hat, dxi_violation, in_dh, MomentTriple, WeightFamily, DEFAULT_PLOTTING_GAMMA};
use bmcusum_core::montecarlo::{replicate_rng, Scenario};
use bmcusum_core::{Error, GevParams, Sample};
use clap::{Args, Parser, Subcommand};

use crate::io::{load_csv, ColumnSelector};
use crate::parallel;
use crate::report::*;
use crate::tables::{cells, TableId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "bmcusum", version, about = "CUSUM change-point tests for independent block maxima")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a series of block maxima for a change in distribution.
    Test(TestArgs),
    /// Estimate GEV parameters by (generalized) probability weighted moments.
    Estimate(EstimateArgs),
    /// Repeat the tests over many randomly de-tied copies of the data.
    Detie(DetieArgs),
    /// Estimate rejection rates by Monte Carlo simulation.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct Input {
    /// Delimited text file with one observation per row.
    pub file: PathBuf,
    /// Column to read: a 1-based index or a header name.
    #[arg(long, default_value = "1")]
    pub column: ColumnSelector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    Mu,
    Sigma,
    Xi,
    All,
}

impl Target {
    fn parameters(self) -> Vec<Parameter> {
        match self {
            Target::Mu => vec![Parameter::Mu],
            Target::Sigma => vec![Parameter::Sigma],
            Target::Xi => vec![Parameter::Xi],
            Target::All => Parameter::ALL.to_vec(),
        }
    }
}

fn parse_family(s: &str) -> Result<TestFamily, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct TestFlags {
    /// pwm-t, pwm-s or gpwm.
    #[arg(long, default_value = "pwm-t", value_parser = parse_family)]
    pub family: TestFamily,
    /// Splits closer than r to either end are not considered.
    #[arg(long, default_value_t = DEFAULT_TRIM)]
    pub r: usize,
    /// Skip the translation by the full-sample location estimate.
    #[arg(long)]
    pub no_recenter: bool,
    /// Plotting-position constant; defaults to -0.35 for pwm-t and pwm-s, 0 for gpwm.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
}

impl TestFlags {
    fn configs(&self, targets: &[Parameter]) -> Vec<TestConfig> {
        targets
            .iter()
            .map(|&p| {
                let mut c = TestConfig::new(self.family, p);
                c.r = self.r;
                c.recenter = !self.no_recenter;
                if let Some(g) = self.gamma {
                    c.gamma = g;
                }
                c
            })
            .collect()
    }

    fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(self.family.default_gamma())
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub flags: TestFlags,
    #[arg(long, value_enum, default_value = "all")]
    pub target: Target,
    /// Significance level; the three-test decision uses alpha/3.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Break ties with one random perturbation before testing.
    #[arg(long)]
    pub detie: bool,
    /// Seed of the perturbation used by --detie.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, value_enum, default_value = "pwm")]
    pub family: MomentFamily,
    /// Plotting-position constant of the rank-based estimator; defaults to -0.35 for pwm, 0 for gpwm.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DetieArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub flags: TestFlags,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; defaults to $BMCUSUM_JOBS, then to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// One of the published designs, T1 to T6.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    pub table: Option<TableId>,
    /// JSON file describing a single scenario.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Replications per cell; defaults to 500 with --reduced, 1000 otherwise.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Six-cell subset of the table.
    #[arg(long)]
    pub reduced: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; defaults to $BMCUSUM_JOBS, then to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn data(message: impl Into<String>) -> Self {
        Failure { code: EXIT_DATA, message: message.into() }
    }
}

/// Whether an error means the data fall outside a domain rather than being
/// unusable or misconfigured.
pub fn is_infeasibility(e: &Error) -> bool {
    matches!(
        e,
        Error::OutsideDxi(_)
            | Error::OutsideDomain { .. }
            | Error::NoRoot { .. }
            | Error::ShapeTooLarge { .. }
            | Error::NoFeasibleSplit { .. }
            | Error::DegenerateVariance(_)
            | Error::NonPositiveEcdf { .. }
            | Error::GammaPole(_)
    )
}

fn core_failure(e: Error) -> Failure {
    let code = if is_infeasibility(&e) { EXIT_INFEASIBLE } else { EXIT_DATA };
    Failure { code, message: e.to_string() }
}

struct Output {
    stdout: String,
    warnings: Vec<String>,
    code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, warnings: Vec::new(), code: EXIT_OK }
    }
}

fn load(input: &Input) -> Result<(Sample, DataSummary), Failure> {
    let sample = load_csv(&input.file, &input.column).map_err(|e| Failure::data(e.to_string()))?;
    let data = DataSummary {
        file: input.file.display().to_string(),
        column: input.column.to_string(),
        n: sample.len(),
        n_distinct: sample.distinct_count(),
    };
    Ok((sample, data))
}

fn render(format: Format, json: impl FnOnce() -> String, csv: Option<&dyn Fn() -> String>, text: impl FnOnce() -> String) -> Result<String, Failure> {
    match format {
        Format::Json => Ok(json()),
        Format::Text => Ok(text()),
        Format::Csv => csv.map(|f| f()).ok_or_else(|| Failure::data("CSV output is not available for this command")),
    }
}

fn cmd_test(args: &TestArgs) -> Result<Output, Failure> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::data(format!("--alpha {} must lie strictly between 0 and 1", args.alpha)));
    }
    let (mut sample, data) = load(&args.input)?;
    let mut warnings = Vec::new();
    if args.detie {
        let d = tie_step(&sample).map_err(core_failure)?;
        let mut rng = replicate_rng(args.seed, "detie", 0);
        sample = detie_replicate(&sample, d, &mut rng).map_err(core_failure)?;
    } else if data.n_distinct < data.n {
        warnings.push(format!(
            "the data contain ties: n' = {} distinct values among n = {} observations; \
             the tests assume continuous data, consider `bmcusum detie` or --detie",
            data.n_distinct, data.n
        ));
    }
    let targets = args.target.parameters();
    let configs = args.flags.configs(&targets);
    configs.iter().try_for_each(|c| c.validate(sample.len())).map_err(core_failure)?;
    let mut code = EXIT_OK;
    let results: Vec<TargetOutcome> = targets
        .iter()
        .zip(run_battery(&sample, &configs))
        .map(|(&target, r)| match r {
            Ok(r) => TargetOutcome { target, rejected: Some(r.p_value < args.alpha), result: Some(r), error: None },
            Err(e) => {
                code = code.max(core_failure(e.clone()).code);
                TargetOutcome { target, result: None, rejected: None, error: Some(e.to_string()) }
            }
        })
        .collect();
    let bonferroni = (args.target == Target::All).then(|| {
        let level = args.alpha / 3.0;
        Bonferroni {
            level,
            rejected: results.iter().any(|o| o.result.as_ref().is_some_and(|r| r.p_value < level)),
        }
    });
    let report = TestReport {
        schema_version: SCHEMA_VERSION,
        command: "test",
        config: TestCommandConfig {
            family: args.flags.family,
            targets,
            r: args.flags.r,
            gamma: args.flags.gamma(),
            recenter: !args.flags.no_recenter,
            variance_correction: configs[0].variance_correction,
            alpha: args.alpha,
            detie: args.detie,
            seed: args.seed,
        },
        data,
        results,
        bonferroni,
        warnings: warnings.clone(),
    };
    let stdout = render(args.format, || to_json(&report), None, || report.to_text())?;
    Ok(Output { stdout, warnings, code })
}

fn estimate_entry(
    estimator: &'static str,
    m: Result<MomentTriple, Error>,
    approx: fn(&MomentTriple) -> bmcusum_core::Result<GevParams>,
    exact: fn(&MomentTriple) -> bmcusum_core::Result<GevParams>,
    violation: impl Fn(&MomentTriple) -> Option<String>,
) -> Result<EstimateEntry, Failure> {
    let m = m.map_err(core_failure)?;
    let violation = violation(&m);
    let mut errors = Vec::new();
    let mut keep = |r: bmcusum_core::Result<GevParams>| r.map_err(|e| errors.push(e.to_string())).ok();
    let approximate = keep(approx(&m));
    let exact = keep(exact(&m));
    let discrepancy = approximate
        .zip(exact)
        .map(|(a, e)| [e.mu - a.mu, e.sigma - a.sigma, e.xi - a.xi]);
    Ok(EstimateEntry {
        estimator,
        moments: m.as_array(),
        feasible: violation.is_none(),
        violation,
        approximate,
        exact,
        discrepancy,
        errors,
    })
}

fn cmd_estimate(args: &EstimateArgs) -> Result<Output, Failure> {
    let (sample, data) = load(&args.input)?;
    let (gamma, estimates) = match args.family {
        MomentFamily::Pwm => {
            let gamma = args.gamma.unwrap_or(DEFAULT_PLOTTING_GAMMA);
            let violation = |m: &MomentTriple| dxi_violation(m).map(|v| v.to_string());
            let entries = vec![
                estimate_entry("b_hat", b_hat(&sample), gev_maps::pwm_to_gev_approx, gev_maps::pwm_to_gev_exact, violation)?,
                estimate_entry(
                    "beta_hat",
                    beta_hat(&sample, WeightFamily::Pwm, gamma),
                    gev_maps::pwm_to_gev_approx,
                    gev_maps::pwm_to_gev_exact,
                    violation,
                )?,
            ];
            (gamma, entries)
        }
        MomentFamily::Gpwm => {
            let gamma = args.gamma.unwrap_or(0.0);
            let violation = |m: &MomentTriple| {
                (!in_dh(m)).then(|| "no GEV distribution has these generalized moments".to_string())
            };
            let entries = vec![estimate_entry(
                "beta_hat",
                beta_hat(&sample, WeightFamily::Gpwm, gamma),
                gev_maps::gpwm_to_gev_approx,
                gev_maps::gpwm_to_gev_exact,
                violation,
            )?];
            (gamma, entries)
        }
    };
    let code = if estimates.iter().all(|e| e.feasible) { EXIT_OK } else { EXIT_INFEASIBLE };
    let warnings = estimates
        .iter()
        .filter_map(|e| e.violation.as_ref().map(|v| format!("{} is infeasible: {v}", e.estimator)))
        .collect();
    let report = EstimateReport {
        schema_version: SCHEMA_VERSION,
        command: "estimate",
        config: EstimateConfig { family: args.family, gamma },
        data,
        estimates,
    };
    let stdout = render(args.format, || to_json(&report), None, || report.to_text())?;
    Ok(Output { stdout, warnings, code })
}

fn cmd_detie(args: &DetieArgs) -> Result<Output, Failure> {
    let (sample, data) = load(&args.input)?;
    if args.replicates == 0 {
        return Err(Failure::data("--replicates must be at least 1"));
    }
    let configs = args.flags.configs(&Parameter::ALL);
    configs.iter().try_for_each(|c| c.validate(sample.len())).map_err(core_failure)?;
    let jobs = parallel::resolve_jobs(args.jobs);
    let report = parallel::detie_report(&sample, args.replicates, &configs, args.seed, jobs).map_err(core_failure)?;
    let doc = DetieDocument {
        schema_version: SCHEMA_VERSION,
        command: "detie",
        config: DetieConfig {
            family: args.flags.family,
            r: args.flags.r,
            gamma: args.flags.gamma(),
            recenter: !args.flags.no_recenter,
            replicates: args.replicates,
            seed: args.seed,
        },
        data,
        report,
    };
    let stdout = render(args.format, || to_json(&doc), Some(&|| doc.to_csv()), || doc.to_text())?;
    Ok(Output::ok(stdout))
}

fn read_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::data(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        Failure::data(format!(
            "invalid scenario in {} at `{}`: {}; expected fields name, n, generator {{kind: null|change, ...}}, \
             replications, tests [{{test: gev|mean|variance, ...}}], optional level and master_seed",
            path.display(),
            if at.is_empty() { "." } else { &at },
            e.inner()
        ))
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Output, Failure> {
    let reps = args.reps.unwrap_or(if args.reduced { 500 } else { 1000 });
    if reps == 0 {
        return Err(Failure::data("--reps must be at least 1"));
    }
    let jobs = parallel::resolve_jobs(args.jobs);
    let (grid, scenarios): (Vec<_>, Vec<_>) = match (&args.table, &args.scenario) {
        (Some(table), _) => cells(*table, args.reduced)
            .into_iter()
            .map(|c| (Some(c), c.scenario(reps, args.seed)))
            .unzip(),
        (None, Some(path)) => {
            let mut s = read_scenario(path)?;
            if args.reps.is_some() || s.replications == 0 {
                s.replications = reps;
            }
            s.master_seed = args.seed;
            (vec![None], vec![s])
        }
        (None, None) => return Err(Failure::data("either --table or --scenario is required")),
    };
    if scenarios.is_empty() {
        return Err(Failure::data("the selected grid is empty"));
    }
    let reports = parallel::run_scenarios(&scenarios, jobs).map_err(|e| Failure::data(e.to_string()))?;
    let cells = grid
        .into_iter()
        .zip(scenarios)
        .zip(reports)
        .map(|((cell, scenario), report)| {
            let reference = report
                .tests
                .iter()
                .map(|t| cell.and_then(|c| c.reference(&t.test)))
                .collect();
            CellReport { cell, scenario, report, reference }
        })
        .collect();
    let doc = SimulateDocument {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        config: SimulateConfig {
            table: args.table.map(|t| t.to_string()),
            scenario_file: args.scenario.as_ref().map(|p| p.display().to_string()),
            reduced: args.reduced,
            reps,
            seed: args.seed,
        },
        cells,
    };
    let stdout = render(args.format, || to_json(&doc), Some(&|| doc.to_csv()), || doc.to_text())?;
    Ok(Output::ok(stdout))
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `out`; warnings, errors and timing to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_DATA } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let start = Instant::now();
    let result = match &cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Detie(a) => cmd_detie(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match result {
        Ok(output) => {
            for w in &output.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let _ = out.write_all(output.stdout.as_bytes());
            if matches!(cli.command, Command::Simulate(_) | Command::Detie(_)) {
                let _ = writeln!(err, "elapsed: {:.2}s", start.elapsed().as_secs_f64());
            }
            output.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

