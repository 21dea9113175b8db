//! Experiment driver: configuration parsing and the `geometry`, `sweep`,
//! `verify` and `model-verify` runners.

pub mod config;
pub mod model_check;
pub mod run;
