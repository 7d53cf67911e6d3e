//! Harness around `dpboot-core`: configuration, CSV ingestion, coverage
//! simulations, dataset runs and curve export.

pub mod config;
pub mod curves;
pub mod error;
pub mod ingest;
pub mod methods;
pub mod run;
pub mod simulate;

pub use config::{DataModel, Method, SimConfig};
pub use curves::{emit_curve, CurveKind, CurveParams, NamedCurve};
pub use error::{HarnessError, Result};
pub use run::{run_dataset, RunConfig, RunReport};
pub use simulate::{simulate_coverage, CoverageReport};

/// Caps the global thread pool at `DPBOOT_THREADS` when it is set.
pub fn init_threads_from_env() -> Result<()> {
    let Ok(v) = std::env::var("DPBOOT_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("DPBOOT_THREADS=`{v}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| HarnessError::Config(e.to_string()))
}
