//! Experiment harness for CVRP operator-correlation studies: configuration,
//! command drivers, statistics and deterministic result files.

pub mod config;
pub mod experiments;
pub mod report;
pub mod stats;
