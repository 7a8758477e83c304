//! Graph generators, Matrix Market ingestion, and the benchmark harness
//! around the lapcond preconditioners.

pub mod benchmark;
pub mod emit;
pub mod error;
pub mod generators;
pub mod mtx;

pub use error::{BenchError, Result};

/// Seed resolution: an explicit flag wins, then the LAPCOND_SEED environment
/// variable, then 0.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    if let Some(s) = flag {
        return s;
    }
    if let Ok(text) = std::env::var("LAPCOND_SEED") {
        if let Ok(v) = text.trim().parse::<u64>() {
            return v;
        }
    }
    0
}
