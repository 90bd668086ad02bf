//! The relative walk of two independently moving nodes, simulated on the
//! unbounded lattice with the boundary tested geometrically.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chunked_trials;
use crate::rng::RngStream;

/// Calibrated hitting-horizon constant: with horizon `m / (c_h ln n)` at
/// `s = 32`, `n = 1024` the boundary is hit in well under 1% of walks.
pub const DEFAULT_C_H: f64 = 8.0;

/// Exact law of one relative step, indexed `[a + 2][b + 2]` for
/// `a, b ∈ {-2..2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPmf {
    pub probs: [[f64; 5]; 5],
}

impl StepPmf {
    pub fn get(&self, a: i32, b: i32) -> f64 {
        if a.abs() > 2 || b.abs() > 2 {
            return 0.0;
        }
        self.probs[(a + 2) as usize][(b + 2) as usize]
    }

    pub fn marginal(&self) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (a, row) in self.probs.iter().enumerate() {
            out[a] = row.iter().sum();
        }
        out
    }
}

/// Distribution of the difference of two independent nine-point moves:
/// per coordinate `P(0) = 1/3`, `P(±1) = 2/9`, `P(±2) = 1/9`, independent
/// across coordinates.
pub fn relative_step_pmf() -> StepPmf {
    let axis = [1.0 / 9.0, 2.0 / 9.0, 3.0 / 9.0, 2.0 / 9.0, 1.0 / 9.0];
    let mut probs = [[0.0; 5]; 5];
    for a in 0..5 {
        for b in 0..5 {
            probs[a][b] = axis[a] * axis[b];
        }
    }
    StepPmf { probs }
}

/// One relative step: each coordinate is the difference of two independent
/// uniform draws from {-1, 0, 1}.
#[inline]
fn relative_step<R: Rng + ?Sized>(rng: &mut R) -> (i64, i64) {
    let idx = rng.gen_range(0..81u32);
    let (i, j) = (idx % 9, idx / 9);
    (
        (i / 3) as i64 - (i % 3) as i64,
        (j / 3) as i64 - (j % 3) as i64,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitEstimate {
    pub trials: u64,
    pub hits: u64,
}

impl HitEstimate {
    pub fn probability(&self) -> f64 {
        self.hits as f64 / self.trials.max(1) as f64
    }

    pub fn std_err(&self) -> f64 {
        let p = self.probability();
        (p * (1.0 - p) / self.trials.max(1) as f64).sqrt()
    }
}

/// `floor(m / (c_h ln n))` with `m = s²`.
pub fn hitting_horizon(s: usize, n: usize, c_h: f64) -> u64 {
    ((s * s) as f64 / (c_h * (n as f64).ln())).floor() as u64
}

/// Fraction of relative walks from the origin that reach the boundary
/// (either coordinate at distance ≥ s/2) at some time `t < horizon`.
pub fn hitting_time_mc(s: usize, horizon: u64, trials: u64, rng: &RngStream) -> HitEstimate {
    let half = s as f64 / 2.0;
    let hits = chunked_trials(
        rng,
        trials,
        |r, count| {
            let mut hits = 0u64;
            for _ in 0..count {
                let (mut x, mut y) = (0i64, 0i64);
                for _ in 1..horizon {
                    let (dx, dy) = relative_step(r);
                    x += dx;
                    y += dy;
                    if x.abs() as f64 >= half || y.abs() as f64 >= half {
                        hits += 1;
                        break;
                    }
                }
            }
            hits
        },
        |a, b| a + b,
    );
    HitEstimate { trials, hits }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnEstimate {
    pub horizon: u64,
    pub trials: u64,
    pub mean: f64,
    pub std_err: f64,
}

#[derive(Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

/// Monte Carlo mean number of visits to the origin at times `1..=horizon`.
pub fn return_count_mc(horizon: u64, trials: u64, rng: &RngStream) -> ReturnEstimate {
    let m = chunked_trials(
        rng,
        trials,
        |r, count| {
            let mut acc = Moments::default();
            for _ in 0..count {
                let (mut x, mut y) = (0i64, 0i64);
                let mut visits = 0u64;
                for _ in 0..horizon {
                    let (dx, dy) = relative_step(r);
                    x += dx;
                    y += dy;
                    visits += u64::from(x == 0 && y == 0);
                }
                let v = visits as f64;
                acc.sum += v;
                acc.sum_sq += v * v;
            }
            acc
        },
        |a, b| Moments {
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
        },
    );
    let t = trials.max(1) as f64;
    let mean = m.sum / t;
    let var = (m.sum_sq / t - mean * mean).max(0.0) * t / (t - 1.0).max(1.0);
    ReturnEstimate {
        horizon,
        trials,
        mean,
        std_err: (var / t).sqrt(),
    }
}
