//! Report documents written by the commands, as JSON, CSV or aligned text.
//!
//! Every JSON document carries `schema_version` and the fully resolved
//! configuration of the run.

use std::fmt::Write as _;

use bmcusum_core::cusum::{TestFamily, TestResult, VarianceCorrection};
use bmcusum_core::detie::{DetieReport, Envelope};
use bmcusum_core::gev_maps::Parameter;
use bmcusum_core::montecarlo::{Scenario, SimReport};
use bmcusum_core::GevParams;
use serde::Serialize;

use crate::tables::Cell;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Serialize)]
pub struct DataSummary {
    pub file: String,
    pub column: String,
    pub n: usize,
    pub n_distinct: usize,
}

// ---------------------------------------------------------------- test

#[derive(Debug, Clone, Serialize)]
pub struct TestCommandConfig {
    pub family: TestFamily,
    pub targets: Vec<Parameter>,
    pub r: usize,
    pub gamma: f64,
    pub recenter: bool,
    pub variance_correction: VarianceCorrection,
    pub alpha: f64,
    pub detie: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetOutcome {
    pub target: Parameter,
    #[serde(flatten)]
    pub result: Option<TestResult>,
    pub rejected: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bonferroni {
    pub level: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: TestCommandConfig,
    pub data: DataSummary,
    pub results: Vec<TargetOutcome>,
    pub bonferroni: Option<Bonferroni>,
    pub warnings: Vec<String>,
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.digits$}"))
}

fn params(p: Option<GevParams>) -> String {
    p.map_or_else(|| "-".into(), |p| format!("({:.3}, {:.3}, {:.3})", p.mu, p.sigma, p.xi))
}

impl TestReport {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{}: n = {} ({} distinct), family {}, r = {}, gamma = {}, recenter = {}",
            self.data.file, self.data.n, self.data.n_distinct, c.family, c.r, c.gamma, c.recenter
        );
        let _ = writeln!(
            s,
            "{:<6} {:>10} {:>10} {:>8} {:>6}  {:<24} {:<24} {}",
            "target", "statistic", "sigma_hat", "p-value", "split", "left (mu, sigma, xi)", "right (mu, sigma, xi)", "reject"
        );
        for o in &self.results {
            match (&o.result, &o.error) {
                (Some(r), _) => {
                    let _ = writeln!(
                        s,
                        "{:<6} {:>10.4} {:>10.4} {:>8.4} {:>6}  {:<24} {:<24} {}",
                        o.target.as_str(),
                        r.statistic,
                        r.sigma_hat,
                        r.p_value,
                        r.argmax_k,
                        params(r.left_params),
                        params(r.right_params),
                        if o.rejected == Some(true) { "yes" } else { "no" }
                    );
                }
                (None, e) => {
                    let _ = writeln!(s, "{:<6} failed: {}", o.target.as_str(), e.as_deref().unwrap_or("unknown"));
                }
            }
        }
        if let Some(b) = &self.bonferroni {
            let _ = writeln!(
                s,
                "Bonferroni at level {:.4}: {}",
                b.level,
                if b.rejected { "reject" } else { "no rejection" }
            );
        }
        s
    }
}

// ---------------------------------------------------------------- estimate

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MomentFamily {
    Pwm,
    Gpwm,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateConfig {
    pub family: MomentFamily,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateEntry {
    /// `b_hat` or `beta_hat`.
    pub estimator: &'static str,
    pub moments: [f64; 3],
    pub feasible: bool,
    pub violation: Option<String>,
    pub approximate: Option<GevParams>,
    pub exact: Option<GevParams>,
    /// Exact minus approximate, per parameter.
    pub discrepancy: Option<[f64; 3]>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: EstimateConfig,
    pub data: DataSummary,
    pub estimates: Vec<EstimateEntry>,
}

impl EstimateReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}: n = {} ({} distinct)", self.data.file, self.data.n, self.data.n_distinct);
        let _ = writeln!(
            s,
            "{:<9} {:<10} {:>10} {:>10} {:>10}   {}",
            "estimator", "map", "mu", "sigma", "xi", "moments"
        );
        for e in &self.estimates {
            let m = format!("({:.5}, {:.5}, {:.5})", e.moments[0], e.moments[1], e.moments[2]);
            let rows = [("approx", e.approximate), ("exact", e.exact)];
            for (label, p) in rows {
                let [mu, sigma, xi] = p.map(|p| [p.mu, p.sigma, p.xi].map(Some)).unwrap_or([None; 3]);
                let _ = writeln!(
                    s,
                    "{:<9} {:<10} {:>10} {:>10} {:>10}   {}",
                    e.estimator,
                    label,
                    opt(mu, 4),
                    opt(sigma, 4),
                    opt(xi, 4),
                    m
                );
            }
            if let Some(d) = e.discrepancy {
                let _ = writeln!(
                    s,
                    "{:<9} {:<10} {:>10.2e} {:>10.2e} {:>10.2e}",
                    e.estimator, "difference", d[0], d[1], d[2]
                );
            }
            for err in &e.errors {
                let _ = writeln!(s, "{:<9} error: {err}", e.estimator);
            }
        }
        s
    }
}

// ---------------------------------------------------------------- detie

#[derive(Debug, Clone, Serialize)]
pub struct DetieConfig {
    pub family: TestFamily,
    pub r: usize,
    pub gamma: f64,
    pub recenter: bool,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetieDocument {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: DetieConfig,
    pub data: DataSummary,
    pub report: DetieReport,
}

fn envelope_cells(e: Option<Envelope>, digits: usize) -> [String; 2] {
    [opt(e.map(|e| e.min), digits), opt(e.map(|e| e.max), digits)]
}

impl DetieDocument {
    fn dataset(&self) -> String {
        std::path::Path::new(&self.data.file)
            .file_stem()
            .map_or_else(|| self.data.file.clone(), |s| s.to_string_lossy().into_owned())
    }

    /// One row per dataset: sizes, estimate envelopes, p-value envelopes.
    pub fn to_csv(&self) -> String {
        let r = &self.report;
        let mut header = vec!["dataset", "n", "n_distinct", "d", "mu_min", "mu_max", "sigma_min", "sigma_max", "xi_min", "xi_max"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        for t in &r.tests {
            header.push(format!("p_{}_min", t.target));
            header.push(format!("p_{}_max", t.target));
        }
        let mut row = vec![self.dataset(), r.n.to_string(), r.n_distinct.to_string(), format!("{}", r.d)];
        for e in [r.mu_envelope, r.sigma_envelope, r.xi_envelope] {
            row.extend(envelope_cells(e, 4));
        }
        for e in &r.p_value_envelopes {
            row.extend(envelope_cells(*e, 4));
        }
        format!("{}\n{}\n", header.join(","), row.join(","))
    }

    pub fn to_text(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{}: n = {}, n' = {}, d = {}, {} replicates, seed {}",
            self.dataset(),
            r.n,
            r.n_distinct,
            r.d,
            r.replicates.len(),
            r.master_seed
        );
        let _ = writeln!(s, "{:<16} {:>10} {:>10} {:>9}", "quantity", "min", "max", "failures");
        let est = [("mu (b_hat)", r.mu_envelope), ("sigma (b_hat)", r.sigma_envelope), ("xi (b_hat)", r.xi_envelope)];
        let est_failures = r.replicates.iter().filter(|x| x.estimate.is_none()).count();
        for (label, e) in est {
            let [lo, hi] = envelope_cells(e, 4);
            let _ = writeln!(s, "{label:<16} {lo:>10} {hi:>10} {est_failures:>9}");
        }
        for ((t, e), f) in r.tests.iter().zip(&r.p_value_envelopes).zip(&r.failures) {
            let [lo, hi] = envelope_cells(*e, 4);
            let _ = writeln!(s, "{:<16} {lo:>10} {hi:>10} {f:>9}", format!("p {}:{}", t.family, t.target));
        }
        s
    }
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfig {
    pub table: Option<String>,
    pub scenario_file: Option<String>,
    pub reduced: bool,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub cell: Option<Cell>,
    pub scenario: Scenario,
    pub report: SimReport,
    /// Published percentage per test, in the order of `report.tests`.
    pub reference: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateDocument {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: SimulateConfig,
    pub cells: Vec<CellReport>,
}

fn num(v: Option<f64>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_default()
}

impl SimulateDocument {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "scenario,table,from,xi,n,t,test,replications,rejection_pct,mc_se_pct,failures,replicates_with_skips,reference,diff\n",
        );
        for c in &self.cells {
            let (table, from, xi, t) = match &c.cell {
                Some(cell) => (cell.table.to_string(), num(cell.from), num(Some(cell.xi)), num(cell.t)),
                None => Default::default(),
            };
            for (ts, reference) in c.report.tests.iter().zip(&c.reference) {
                let _ = writeln!(
                    s,
                    "\"{}\",{table},{from},{xi},{},{t},{},{},{:.1},{:.2},{},{},{},{}",
                    c.report.scenario,
                    c.report.n,
                    ts.test,
                    c.report.replications,
                    ts.rejection_pct,
                    ts.mc_se_pct,
                    ts.failures,
                    ts.replicates_with_skips,
                    reference.map(|r| format!("{r:.1}")).unwrap_or_default(),
                    reference.map(|r| format!("{:.1}", ts.rejection_pct - r)).unwrap_or_default(),
                );
            }
        }
        s
    }

    /// Side-by-side comparison with the published values.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.cells {
            let _ = writeln!(s, "{} ({} replications)", c.report.scenario, c.report.replications);
            let _ = writeln!(
                s,
                "  {:<14} {:>8} {:>6} {:>10} {:>7} {:>8}",
                "test", "reject%", "se", "published", "diff", "failures"
            );
            for (ts, reference) in c.report.tests.iter().zip(&c.reference) {
                let diff = reference.map(|r| ts.rejection_pct - r);
                let _ = writeln!(
                    s,
                    "  {:<14} {:>8.1} {:>6.2} {:>10} {:>7} {:>8}",
                    ts.test,
                    ts.rejection_pct,
                    ts.mc_se_pct,
                    opt(*reference, 1),
                    diff.map_or_else(|| "-".into(), |d| format!("{d:+.1}")),
                    ts.failures
                );
            }
        }
        s
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("reports serialize");
    s.push('\n');
    s
}
