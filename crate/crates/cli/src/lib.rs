//! Config-driven experiment runner around `mflab-core`: coupled runs,
//! particle-number sweeps, persisted reports, re-checkable series and SVG
//! plots.

pub mod config;
pub mod plot;
pub mod report;
pub mod runner;
