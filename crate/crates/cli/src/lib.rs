//! Command-line harness: verification suites, operators on serialized
//! valuations, and plot data.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;
