//! Experiment driver library: configuration ingestion, preset catalog,
//! parallel experiment execution, reference comparison, verification
//! suite, and CSV/JSON/SVG output.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod presets;
pub mod reference;
pub mod runner;
pub mod suite;
