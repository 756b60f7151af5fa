//! Command-line companion to the core benchmark library: closed-loop runs,
//! the baseline comparison table, Pareto tuning campaigns, Monte Carlo
//! robustness screens, setup selection and SVG reports.

pub mod commands;
pub mod error;
pub mod formats;
pub mod plotkit;
pub mod provenance;
pub mod setups;
