//! Command-line front end: simulation, fitting, testing, per-SNP scans and
//! replicate aggregation.

pub mod adapter;
pub mod commands;
pub mod error;
pub mod io;
