//! Exact generating-function calculus for BPS invariants of stable pairs.

pub mod bps;
pub mod cli;
pub mod curve;
pub mod k3;
pub mod series;
