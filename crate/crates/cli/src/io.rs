//! Reading one numeric column of a delimited text file.
//!
//! The delimiter is guessed from the first non-empty line (`,`, `;` or tab,
//! whichever occurs most; a single column needs none) and a header row is
//! assumed when the first row does not parse as numbers.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use bmcusum_core::Sample;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    /// 1-based position.
    Index(usize),
    Name(String),
}

impl Default for ColumnSelector {
    fn default() -> Self {
        ColumnSelector::Index(1)
    }
}

impl FromStr for ColumnSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty column selector".into());
        }
        match s.parse::<usize>() {
            Ok(0) => Err("column indices start at 1".into()),
            Ok(i) => Ok(ColumnSelector::Index(i)),
            Err(_) => Ok(ColumnSelector::Name(s.to_string())),
        }
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed record at row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("no column named `{0}` in the header")]
    UnknownColumn(String),
    #[error("column {column} requested but row {row} has only {width} fields")]
    MissingField { row: usize, column: usize, width: usize },
    #[error("row {row}, column {column}: cannot parse `{cell}` as a finite number")]
    BadCell { row: usize, column: usize, cell: String },
    #[error("the selected column contains no observations")]
    Empty,
}

fn guess_delimiter(text: &str) -> u8 {
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    [b',', b';', b'\t']
        .into_iter()
        .map(|d| (line.bytes().filter(|&b| b == d).count(), d))
        .filter(|&(c, _)| c > 0)
        .max_by_key(|&(c, d)| (c, std::cmp::Reverse(d)))
        .map_or(b',', |(_, d)| d)
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Parses CSV text; rows are numbered from 1 as they appear in the file.
pub fn parse_csv(text: &str, column: &ColumnSelector) -> Result<Sample, LoadError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(guess_delimiter(text))
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| LoadError::Malformed {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = rec.position().map_or(records.len() + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((row, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(LoadError::Empty);
    };
    let has_header = first.iter().any(|c| parse_cell(c).is_none());
    let col = match column {
        ColumnSelector::Index(i) => i - 1,
        ColumnSelector::Name(name) => {
            if !has_header {
                return Err(LoadError::UnknownColumn(name.clone()));
            }
            first
                .iter()
                .position(|h| h.trim_matches('"') == name)
                .ok_or_else(|| LoadError::UnknownColumn(name.clone()))?
        }
    };
    let body = if has_header { &records[1..] } else { &records[..] };
    let mut values = Vec::with_capacity(body.len());
    for (row, rec) in body {
        let cell = rec.get(col).ok_or(LoadError::MissingField {
            row: *row,
            column: col + 1,
            width: rec.len(),
        })?;
        let x = parse_cell(cell).ok_or_else(|| LoadError::BadCell {
            row: *row,
            column: col + 1,
            cell: cell.to_string(),
        })?;
        values.push(x);
    }
    Sample::new(values).map_err(|_| LoadError::Empty)
}

pub fn load_csv(path: &Path, column: &ColumnSelector) -> Result<Sample, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first() -> ColumnSelector {
        ColumnSelector::Index(1)
    }

    #[test]
    fn single_column() {
        assert_eq!(parse_csv("1\n2\n3\n", &first()).unwrap().values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn header_is_skipped() {
        let s = parse_csv("level\n1.49\n1.46\n", &first()).unwrap();
        assert_eq!(s.values(), &[1.49, 1.46]);
    }

    #[test]
    fn na_cell_is_named() {
        let err = parse_csv("x\n1\nNA\n3\n", &first()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3") && msg.contains("column 1") && msg.contains("NA"), "{msg}");
    }

    #[test]
    fn delimiters_and_names() {
        for d in [",", ";", "\t"] {
            let text = format!("year{d}level\n1897{d}1.58\n1898{d}1.71\n");
            let by_name = parse_csv(&text, &ColumnSelector::Name("level".into())).unwrap();
            let by_index = parse_csv(&text, &ColumnSelector::Index(2)).unwrap();
            assert_eq!(by_name.values(), &[1.58, 1.71]);
            assert_eq!(by_name, by_index);
        }
    }

    #[test]
    fn selection_errors() {
        assert!(matches!(parse_csv("a,b\n1,2\n", &"c".parse().unwrap()), Err(LoadError::UnknownColumn(_))));
        assert!(matches!(parse_csv("1,2\n3\n", &ColumnSelector::Index(2)), Err(LoadError::MissingField { row: 2, .. })));
        assert!(matches!(parse_csv("x\n", &first()), Err(LoadError::Empty)));
        assert!(matches!(parse_csv("", &first()), Err(LoadError::Empty)));
        assert!("0".parse::<ColumnSelector>().is_err());
    }

    #[test]
    fn blank_lines_and_infinities() {
        assert_eq!(parse_csv("1\n\n2\n", &first()).unwrap().len(), 2);
        assert!(matches!(parse_csv("1\ninf\n", &first()), Err(LoadError::BadCell { row: 2, .. })));
    }
}
