//! IO companion to `mable-aft-core`: CSV dataset ingestion, JSON fit
//! reports, prediction output, and a deterministic parallel driver for the
//! Monte Carlo harness. The `mable-aft` binary is a thin layer over this.

pub mod csv_io;
pub mod report;
pub mod runner;

pub use mable_aft_core as core;
