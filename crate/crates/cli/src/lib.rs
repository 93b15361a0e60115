//! Reproducible experiment runs over the gaborkit core library: JSON configs in,
//! JSON reports plus CSV/PGM artifacts out.

pub mod config;
pub mod error;
pub mod refine;
pub mod report;
pub mod run;

pub use config::{Command, ExperimentConfig, Parameters, Which};
pub use error::CliError;
pub use refine::{refine_study, RefineStudy};
pub use report::{Check, Report};
pub use run::{divisor_lattices, identity_sweep, run_experiment};

/// Caps the global rayon pool at `GABORKIT_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("GABORKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("GABORKIT_THREADS must be a positive integer, got '{text}'")))?;
    // a second initialization in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
