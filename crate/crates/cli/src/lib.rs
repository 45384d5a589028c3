//! Experiment runner for gradient percolation: grid specifications, result
//! records and plots, brute-force oracles and the acceptance battery.

pub mod experiment;
pub mod grid;
pub mod oracle;
pub mod output;
pub mod suite;
