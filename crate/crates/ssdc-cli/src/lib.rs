//! Experiment harness for the stagewise stochastic DC optimization toolkit:
//! config parsing, baseline methods, replicate orchestration, and
//! machine-readable trace output. The `ssdc` binary in this crate wraps
//! these modules behind `run` / `tune` / `gen-data` / `eval-crit` verbs.

pub mod baselines;
pub mod config;
pub mod experiment;
