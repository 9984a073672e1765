//! Command-line front end: data ingestion, parallel simulation and de-tying,
//! and the report formats.

pub mod cli;
pub mod io;
pub mod parallel;
pub mod report;
pub mod tables;
