//! Command-line harness for the `acgeom-core` geometry library: scene files,
//! named fixtures, check suites and reports.

pub mod checks;
pub mod cli;
pub mod fixtures;
pub mod report;
pub mod scene;
pub mod suite;
