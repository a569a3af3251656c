//! Experiment runner, self-checks and benchmark suites for `zomirror-core`.

pub mod bench;
pub mod checks;
pub mod config;
pub mod oracles;
pub mod output;
pub mod runner;
