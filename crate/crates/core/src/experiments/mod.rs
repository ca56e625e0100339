//! Simulation harnesses: correlated-source detection in AR(2) signals and
//! spheroid detection on a 3-D grid, plus the triple-product moment check.

mod ar;
mod moment;
pub mod rng;
mod spheroid;

pub use ar::{
    ar2_generate, ar2_generate_with, ar_detect_grid, correlated_source_experiment, correlated_source_from_seeds,
    correlated_source_member, ArCell, ArGridConfig, ArGridReport, ArModel, CorrelatedSourceResult, MemberDifferences,
    Method, MethodTest, SIGNAL_LENGTH,
};
pub use moment::{triple_product_moment_check, MomentCheck, MIN_MOMENT_SAMPLES};
pub use spheroid::{
    pair_average_clustering, spheroid_detect, spheroid_experiment, spheroid_generate, DetectionCounts, Detector,
    GridWorld, SpheroidConfig, SpheroidDetectors, SpheroidReport, SpheroidRun, SpheroidTrace, SPHEROID_NOISE_SD,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Any experiment's output, tagged for serialisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentReport {
    ArDetect(ArGridReport),
    Spheroid(SpheroidReport),
    Moment { checks: Vec<MomentCheck> },
}

/// Maps `f` over `jobs` on `threads` workers, keeping input order.
/// One thread runs inline.
pub fn run_jobs<J, R, F>(threads: usize, jobs: &[J], f: F) -> Result<Vec<R>>
where
    J: Sync,
    R: Send,
    F: Fn(&J) -> R + Sync + Send,
{
    if threads <= 1 {
        return Ok(jobs.iter().map(f).collect());
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(&f).collect()))
}
