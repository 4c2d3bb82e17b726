//! Front-end plumbing for the interface-construction toolkit: run
//! configuration, the quantitative verification suite, and CSV/JSON/plot
//! emitters. The numerics live in `wch-core`; this crate only orchestrates
//! and does IO.

pub mod config;
pub mod emit;
pub mod report;
pub mod verify;
