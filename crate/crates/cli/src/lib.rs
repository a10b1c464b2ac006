//! Experiment runner, report emission and acceptance suite for `polyent`.

pub mod acceptance;
pub mod config;
pub mod experiment;
pub mod report;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use polyent::phase_space::{GraphPoint, MetricGraph};
use polyent::rational::q;

pub use config::ExperimentConfig;
pub use experiment::run_experiment;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resource cap: {0}")]
    Resource(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            CliError::CheckFailed(_) => 4,
        }
    }
}

impl From<polyent::Error> for CliError {
    fn from(e: polyent::Error) -> Self {
        if e.is_resource() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

/// A point with a random edge and a random rational offset of denominator
/// at most 256.
pub fn random_point(g: &MetricGraph, rng: &mut ChaCha8Rng) -> GraphPoint {
    let edge = rng.gen_range(0..g.edge_count());
    let den = rng.gen_range(1..=256i128);
    let num = rng.gen_range(0..=den);
    g.canonicalize(edge, q(num, den))
}
