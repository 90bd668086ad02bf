//! Balls-in-bins occupancy envelope check.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{chunked_trials, OracleError};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub balls: u64,
    pub bins: usize,
    pub trials: u64,
    /// Envelope `[b/6m, 7b/3m]`.
    pub lower: f64,
    pub upper: f64,
    pub min_observed: u64,
    pub max_observed: u64,
    /// Bin observations outside the envelope, over all bins and trials.
    pub violations: u64,
    /// Whether `b > 32 m ln n`; below it the envelope carries no guarantee.
    pub size_condition_met: bool,
}

#[derive(Clone, Copy)]
struct Tally {
    min: u64,
    max: u64,
    violations: u64,
}

impl Default for Tally {
    fn default() -> Self {
        Tally {
            min: u64::MAX,
            max: 0,
            violations: 0,
        }
    }
}

/// Throws `balls` independently into `bins` bins (`probs` gives per-bin
/// probabilities, uniform when `None`) for `trials` rounds and counts bin
/// loads outside `[b/6m, 7b/3m]`.
///
/// Every bin probability must lie within `1/(3m)` of `1/m`. A ball count at
/// or below `32 m ln n` only logs a warning.
pub fn concentration_check(
    balls: u64,
    bins: usize,
    probs: Option<&[f64]>,
    n: usize,
    trials: u64,
    rng: &RngStream,
) -> Result<ConcentrationReport, OracleError> {
    if bins == 0 {
        return Err(OracleError::Precondition("need at least one bin".into()));
    }
    let m = bins as f64;
    let cumulative: Option<Vec<f64>> = match probs {
        None => None,
        Some(p) => {
            if p.len() != bins {
                return Err(OracleError::Precondition(format!(
                    "{} probabilities for {bins} bins",
                    p.len()
                )));
            }
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(OracleError::Precondition(format!(
                    "probabilities sum to {total}"
                )));
            }
            if let Some((i, q)) = p
                .iter()
                .enumerate()
                .find(|(_, q)| (**q - 1.0 / m).abs() > 1.0 / (3.0 * m) + 1e-12)
            {
                return Err(OracleError::Precondition(format!(
                    "bin {i} probability {q} outside [2/(3m), 4/(3m)]"
                )));
            }
            Some(
                p.iter()
                    .scan(0.0, |acc, q| {
                        *acc += q;
                        Some(*acc)
                    })
                    .collect(),
            )
        }
    };
    let size_condition_met = balls as f64 > 32.0 * m * (n as f64).ln();
    if !size_condition_met {
        log::warn!("b = {balls} <= 32 m ln n; the occupancy envelope is not guaranteed");
    }
    let lower = balls as f64 / (6.0 * m);
    let upper = 7.0 * balls as f64 / (3.0 * m);

    let tally = chunked_trials(
        rng,
        trials,
        |r, count| {
            let mut t = Tally::default();
            let mut load = vec![0u64; bins];
            for _ in 0..count {
                load.iter_mut().for_each(|c| *c = 0);
                for _ in 0..balls {
                    let bin = match &cumulative {
                        None => r.gen_range(0..bins),
                        Some(cum) => {
                            let u: f64 = r.gen();
                            cum.partition_point(|&c| c <= u).min(bins - 1)
                        }
                    };
                    load[bin] += 1;
                }
                for &c in &load {
                    t.min = t.min.min(c);
                    t.max = t.max.max(c);
                    if (c as f64) < lower || (c as f64) > upper {
                        t.violations += 1;
                    }
                }
            }
            t
        },
        |a, b| Tally {
            min: a.min.min(b.min),
            max: a.max.max(b.max),
            violations: a.violations + b.violations,
        },
    );
    Ok(ConcentrationReport {
        balls,
        bins,
        trials,
        lower,
        upper,
        min_observed: tally.min,
        max_observed: tally.max,
        violations: tally.violations,
        size_condition_met,
    })
}
