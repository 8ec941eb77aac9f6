pub mod bath;
pub mod config;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod models;
pub mod operators;
pub mod output;
pub mod propagator;
pub mod units;
