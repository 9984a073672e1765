//! The simulation designs of the published level and power tables, with the
//! published percentages as diff targets.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use bmcusum_core::cusum::{TestConfig, TestFamily, DEFAULT_TRIM};
use bmcusum_core::montecarlo::{Generator, Law, Scenario, TestSpec};
use bmcusum_core::{BaseDistribution, GevParams, GpdParams};
use serde::Serialize;

const REFERENCE_CSV: &str = include_str!("../data/reference_tables.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
}

impl TableId {
    pub const ALL: [TableId; 6] = [TableId::T1, TableId::T2, TableId::T3, TableId::T4, TableId::T5, TableId::T6];

    pub fn describe(self) -> &'static str {
        match self {
            TableId::T1 => "GEV(0,1,xi) null",
            TableId::T2 => "GPD(0,1,xi) null, block size 1",
            TableId::T3 => "shape change GEV(0,1,-0.4) -> GEV(0,1,xi)",
            TableId::T4 => "shape change GEV(0,1,from) -> GEV(0,1,xi), from in {0, 0.2}",
            TableId::T5 => "scale change GEV(0,0.5,xi) -> GEV(0,1,xi)",
            TableId::T6 => "location change GEV(0,1,xi) -> GEV(0.5,1,xi)",
        }
    }

    fn is_null(self) -> bool {
        matches!(self, TableId::T1 | TableId::T2)
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for TableId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        TableId::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown table `{s}`; expected one of T1..T6"))
    }
}

/// One row of a table: a data-generating design at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub table: TableId,
    /// Shape before the change in the shape-change designs.
    pub from: Option<f64>,
    pub xi: f64,
    pub n: usize,
    /// Change fraction; absent for null designs.
    pub t: Option<f64>,
}

fn gev(mu: f64, sigma: f64, xi: f64) -> Law {
    Law::gev(GevParams::new(mu, sigma, xi).expect("grid parameters are valid"))
}

impl Cell {
    pub fn name(&self) -> String {
        let shape = match self.from {
            Some(f) => format!("xi={f}->{}", self.xi),
            None => format!("xi={}", self.xi),
        };
        match self.t {
            Some(t) => format!("{} {shape} n={} t={t}", self.table, self.n),
            None => format!("{} {shape} n={}", self.table, self.n),
        }
    }

    pub fn generator(&self) -> Generator {
        let t = self.t.unwrap_or(0.5);
        let xi = self.xi;
        match self.table {
            TableId::T1 => Generator::Null { law: gev(0.0, 1.0, xi) },
            TableId::T2 => Generator::Null {
                law: Law {
                    base: BaseDistribution::gpd(GpdParams::new(1.0, xi).expect("grid parameters are valid")),
                    block_size: 1,
                },
            },
            TableId::T3 | TableId::T4 => Generator::Change {
                before: gev(0.0, 1.0, self.from.unwrap_or(-0.4)),
                after: gev(0.0, 1.0, xi),
                t,
            },
            TableId::T5 => Generator::Change { before: gev(0.0, 0.5, xi), after: gev(0.0, 1.0, xi), t },
            TableId::T6 => Generator::Change { before: gev(0.0, 1.0, xi), after: gev(0.5, 1.0, xi), t },
        }
    }

    /// Tests reported in the table, in column order.
    pub fn tests(&self) -> Vec<TestSpec> {
        let mut tests = Vec::new();
        if !self.table.is_null() {
            tests.push(TestSpec::Mean { r: DEFAULT_TRIM });
            tests.push(TestSpec::Variance { r: DEFAULT_TRIM });
        }
        for family in [TestFamily::PwmT, TestFamily::GpwmS] {
            tests.extend(TestConfig::triple(family).map(TestSpec::Gev));
        }
        tests
    }

    pub fn scenario(&self, replications: usize, master_seed: u64) -> Scenario {
        Scenario {
            name: self.name(),
            n: self.n,
            generator: self.generator(),
            replications,
            level: 0.05,
            tests: self.tests(),
            master_seed,
        }
    }

    /// Published percentage for the test with label `test`.
    pub fn reference(&self, test: &str) -> Option<f64> {
        references().get(&(self.key(), test.to_string())).copied()
    }

    fn key(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.2}")).unwrap_or_default();
        format!("{}|{}|{:.2}|{}|{}", self.table, opt(self.from), self.xi, self.n, opt(self.t))
    }
}

fn references() -> &'static HashMap<(String, String), f64> {
    static TABLE: OnceLock<HashMap<(String, String), f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(REFERENCE_CSV.as_bytes());
        let mut map = HashMap::new();
        for rec in reader.records() {
            let rec = rec.expect("embedded reference data is well formed");
            let num = |i: usize| -> Option<f64> { rec[i].parse().ok() };
            let cell = Cell {
                table: rec[0].parse().expect("known table"),
                from: num(1),
                xi: num(2).expect("shape"),
                n: rec[3].parse().expect("sample size"),
                t: num(4),
            };
            map.insert((cell.key(), rec[5].to_string()), num(6).expect("percentage"));
        }
        map
    })
}

fn shapes() -> Vec<f64> {
    (-10..=11).map(|i| i as f64 / 10.0).collect()
}

const FRACTIONS: [f64; 3] = [0.25, 0.5, 0.75];

/// All rows of a table, or a six-row subset when `reduced`.
pub fn cells(table: TableId, reduced: bool) -> Vec<Cell> {
    let null = |xi: f64, n: usize| Cell { table, from: None, xi, n, t: None };
    let change = |from: Option<f64>, xi: f64, n: usize, t: f64| Cell { table, from, xi, n, t: Some(t) };
    let mut out = Vec::new();
    match (table, reduced) {
        (TableId::T1 | TableId::T2, false) => {
            for xi in shapes() {
                for n in [50, 100, 200, 400] {
                    out.push(null(xi, n));
                }
            }
        }
        (TableId::T1 | TableId::T2, true) => {
            for xi in [-0.4, 0.0, 0.2] {
                for n in [100, 200] {
                    out.push(null(xi, n));
                }
            }
        }
        (TableId::T3, false) => {
            for xi in [-0.2, 0.0, 0.2, 0.4] {
                for n in [100, 200] {
                    for t in FRACTIONS {
                        out.push(change(Some(-0.4), xi, n, t));
                    }
                }
            }
        }
        (TableId::T3, true) => {
            for xi in [-0.2, 0.2, 0.4] {
                for n in [100, 200] {
                    out.push(change(Some(-0.4), xi, n, 0.5));
                }
            }
        }
        (TableId::T4, false) => {
            for (from, targets) in [(0.0, [0.2, 0.4, 0.6]), (0.2, [0.4, 0.6, 0.8])] {
                for xi in targets {
                    for n in [100, 200] {
                        for t in FRACTIONS {
                            out.push(change(Some(from), xi, n, t));
                        }
                    }
                }
            }
        }
        (TableId::T4, true) => {
            for (from, xi) in [(0.0, 0.4), (0.0, 0.6), (0.2, 0.6)] {
                for n in [100, 200] {
                    out.push(change(Some(from), xi, n, 0.5));
                }
            }
        }
        (TableId::T5 | TableId::T6, false) => {
            for xi in [-0.4, 0.0, 0.4, 0.8] {
                for n in [100, 200] {
                    for t in FRACTIONS {
                        out.push(change(None, xi, n, t));
                    }
                }
            }
        }
        (TableId::T5 | TableId::T6, true) => {
            for xi in [-0.4, 0.0, 0.4] {
                for n in [100, 200] {
                    out.push(change(None, xi, n, 0.5));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_grid_cell_has_references_for_every_test() {
        let mut total = 0;
        for table in TableId::ALL {
            for reduced in [false, true] {
                for cell in cells(table, reduced) {
                    for spec in cell.tests() {
                        assert!(cell.reference(&spec.label()).is_some(), "{} {}", cell.name(), spec.label());
                        total += 1;
                    }
                }
            }
        }
        assert!(total > 1900);
        assert_eq!(references().len(), 1920);
    }

    #[test]
    fn reduced_grids_have_six_cells() {
        for table in TableId::ALL {
            assert_eq!(cells(table, true).len(), 6);
            for c in cells(table, true) {
                assert!(cells(table, false).contains(&c));
            }
        }
    }

    #[test]
    fn spot_values() {
        let t1 = Cell { table: TableId::T1, from: None, xi: 0.0, n: 200, t: None };
        assert_eq!(t1.reference("pwm-t:mu"), Some(4.5));
        assert_eq!(t1.reference("pwm-t:sigma"), Some(3.6));
        assert_eq!(t1.reference("pwm-t:xi"), Some(3.8));
        let t2 = Cell { table: TableId::T2, xi: 0.2, n: 400, ..t1 };
        assert_eq!(t2.reference("gpwm-s:mu"), Some(3.8));
        let t4 = Cell { table: TableId::T4, from: Some(0.2), xi: 0.6, n: 200, t: Some(0.5) };
        assert_eq!(t4.reference("gpwm-s:xi"), Some(48.9));
        let t3 = Cell { table: TableId::T3, from: Some(-0.4), xi: 0.4, n: 200, t: Some(0.5) };
        assert_eq!(t3.reference("pwm-t:xi"), Some(95.7));
        assert_eq!(t3.reference("gpwm-s:xi"), Some(97.4));
        let t5 = Cell { table: TableId::T5, from: None, xi: 0.0, n: 200, t: Some(0.5) };
        assert_eq!(t5.reference("pwm-t:sigma"), Some(99.9));
        assert_eq!(t5.reference("variance"), Some(94.6));
    }

    #[test]
    fn names_are_distinct() {
        let mut names: Vec<String> = TableId::ALL.iter().flat_map(|&t| cells(t, false)).map(|c| c.name()).collect();
        let before = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), before);
    }

    #[test]
    fn parse_table_ids() {
        assert_eq!("t4".parse::<TableId>().unwrap(), TableId::T4);
        assert!("T7".parse::<TableId>().is_err());
    }
}
