//! CLI and acceptance harness for the six-vertex lattice toolkit.

pub mod fmt;
pub mod run;
pub mod verify;

pub use run::run_main;
