//! Standalone oracles for the probabilistic structure behind the spreading
//! bounds: concentration, conductance, mixing, hitting and return counts.

mod concentration;
mod conductance;
mod mixing;
mod walk;

pub use concentration::{concentration_check, ConcentrationReport};
pub use conductance::{
    conductance_exact, rgg_conductance_scaling, rgg_radius, Conductance, RggGraph, RggRow,
};
pub use mixing::{
    exact_mixing, exact_tv_curve, mixing_time_iterate, mixing_time_powering, MixingReport,
    EPS_FLOOR,
};
pub use walk::{
    hitting_horizon, hitting_time_mc, relative_step_pmf, return_count_mc, HitEstimate,
    ReturnEstimate, StepPmf, DEFAULT_C_H,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
}

/// Deterministic Monte Carlo fan-out: `trials` split into fixed chunks, each
/// with its own child stream, combined in chunk order. The result does not
/// depend on the thread count.
pub(crate) fn chunked_trials<T, F, G>(
    stream: &crate::rng::RngStream,
    trials: u64,
    run_chunk: F,
    combine: G,
) -> T
where
    T: Send + Default,
    F: Fn(&mut crate::rng::RngStream, u64) -> T + Sync,
    G: Fn(T, T) -> T,
{
    const CHUNKS: u64 = 64;
    let chunks = CHUNKS.min(trials.max(1));
    let sizes: Vec<u64> = (0..chunks)
        .map(|c| trials / chunks + u64::from(c < trials % chunks))
        .collect();
    let job = |c: usize| {
        let mut rng = stream.child(&format!("chunk.{c}"));
        run_chunk(&mut rng, sizes[c])
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<T> = {
        use rayon::prelude::*;
        (0..sizes.len()).into_par_iter().map(job).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<T> = (0..sizes.len()).map(job).collect();
    parts.into_iter().fold(T::default(), combine)
}
