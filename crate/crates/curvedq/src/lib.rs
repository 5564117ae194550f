//! Configuration, file formats and task orchestration on top of
//! `curvedq-core`.

pub mod config;
pub mod error;
pub mod expr;
pub mod output;
pub mod pipeline;
pub mod validate;

pub use config::RunConfig;
pub use error::{CliError, ConfigError};

/// Caps the global rayon pool at `CURVEDQ_THREADS` when set. Returns the
/// requested count.
pub fn init_threads() -> Option<usize> {
    let n = std::env::var("CURVEDQ_THREADS").ok()?.trim().parse::<usize>().ok().filter(|n| *n > 0)?;
    // a pool may already exist when embedded in a larger program
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Some(n)
}
