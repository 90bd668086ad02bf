//! Exact mixing times of the subsquare walk.
//!
//! Two independent routes compute the worst-start mixing time:
//! [`mixing_time_iterate`] pushes each start's distribution forward one
//! sparse step at a time, and [`mixing_time_powering`] binary-lifts over dense
//! matrix powers `P^(2^j)`. Both return the smallest `t` whose worst-start
//! total-variation distance to uniform is at most `eps`.

use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::config::Mobility;
use crate::mobility::{total_variation, MoveKernel};
use crate::model::Cell;

/// Smallest epsilon the `f64` computations resolve reliably.
pub const EPS_FLOOR: f64 = 1e-12;

/// Largest grid side accepted by [`exact_mixing`].
pub const MAX_EXACT_SIDE: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub side: usize,
    pub boundary: Mobility,
    /// `t_mix(1/4)`.
    pub t_quarter: Option<u64>,
    /// The tight epsilon actually used: `max(n^-10, EPS_FLOOR)`.
    pub eps: f64,
    pub t_eps: Option<u64>,
}

/// Start cells that cover every start up to the grid's symmetries. The
/// worst-start distance is the same over this subset as over all cells.
fn representative_starts(kernel: &MoveKernel) -> Vec<Cell> {
    let s = kernel.side;
    match kernel.boundary {
        Mobility::TorusWrap => vec![Cell::new(0, 0)],
        _ => {
            let half = (s - 1) / 2;
            (0..=half)
                .flat_map(|r| (r..=half).map(move |c| Cell::new(r, c)))
                .collect()
        }
    }
}

/// Exact TV to uniform after each of `0..=t_max` steps from `start`.
pub fn exact_tv_curve(kernel: &MoveKernel, start: Cell, t_max: u64) -> Vec<f64> {
    let m = kernel.cells();
    let rows: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|i| kernel.row(Cell::new(i / kernel.side, i % kernel.side)))
        .collect();
    let uniform = vec![1.0 / m as f64; m];
    let mut dist = vec![0.0; m];
    dist[start.index(kernel.side)] = 1.0;
    let mut next = vec![0.0; m];
    let mut out = Vec::with_capacity(t_max as usize + 1);
    out.push(total_variation(&dist, &uniform));
    for _ in 0..t_max {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, &mass) in dist.iter().enumerate() {
            if mass != 0.0 {
                for &(j, p) in &rows[i] {
                    next[j] += mass * p;
                }
            }
        }
        std::mem::swap(&mut dist, &mut next);
        out.push(total_variation(&dist, &uniform));
    }
    out
}

/// Route 1: sparse forward iteration from every representative start.
pub fn mixing_time_iterate(kernel: &MoveKernel, eps: f64, t_max: u64) -> Option<u64> {
    let m = kernel.cells();
    let rows: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|i| kernel.row(Cell::new(i / kernel.side, i % kernel.side)))
        .collect();
    let uniform = vec![1.0 / m as f64; m];
    let starts = representative_starts(kernel);
    let mut dists: Vec<Vec<f64>> = starts
        .iter()
        .map(|c| {
            let mut d = vec![0.0; m];
            d[c.index(kernel.side)] = 1.0;
            d
        })
        .collect();
    let worst = |dists: &[Vec<f64>]| {
        dists
            .iter()
            .map(|d| total_variation(d, &uniform))
            .fold(0.0, f64::max)
    };
    let mut next = vec![0.0; m];
    for t in 0..=t_max {
        if worst(&dists) <= eps {
            return Some(t);
        }
        for d in dists.iter_mut() {
            next.iter_mut().for_each(|x| *x = 0.0);
            for (i, &mass) in d.iter().enumerate() {
                if mass != 0.0 {
                    for &(j, p) in &rows[i] {
                        next[j] += mass * p;
                    }
                }
            }
            d.copy_from_slice(&next);
        }
    }
    None
}

fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        let row = &mut c[i * m..(i + 1) * m];
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k * m..(k + 1) * m];
            for (x, &bkj) in row.iter_mut().zip(brow) {
                *x += aik * bkj;
            }
        }
    }
    c
}

fn worst_row_tv(p: &[f64], m: usize) -> f64 {
    let u = 1.0 / m as f64;
    (0..m)
        .map(|i| {
            0.5 * p[i * m..(i + 1) * m]
                .iter()
                .map(|x| (x - u).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Route 2: dense powers `P^(2^j)` and binary lifting over all start rows.
/// Relies on the worst-start distance being non-increasing in `t`.
pub fn mixing_time_powering(kernel: &MoveKernel, eps: f64, t_max: u64) -> Option<u64> {
    let m = kernel.cells();
    let identity: Vec<f64> = (0..m * m)
        .map(|i| if i / m == i % m { 1.0 } else { 0.0 })
        .collect();
    if worst_row_tv(&identity, m) <= eps {
        return Some(0);
    }
    let mut powers = vec![kernel.dense_matrix()];
    while worst_row_tv(powers.last().unwrap(), m) > eps {
        if (1u64 << (powers.len() - 1)) > t_max {
            return None;
        }
        let last = powers.last().unwrap();
        powers.push(matmul(last, last, m));
    }
    // Largest t with d(t) > eps, built from the highest bit down.
    let mut acc = identity;
    let mut t = 0u64;
    for j in (0..powers.len()).rev() {
        let candidate = matmul(&acc, &powers[j], m);
        if worst_row_tv(&candidate, m) > eps {
            acc = candidate;
            t += 1 << j;
        }
    }
    let answer = t + 1;
    (answer <= t_max).then_some(answer)
}

/// `t_mix(1/4)` and `t_mix(max(n^-10, EPS_FLOOR))` by forward iteration.
pub fn exact_mixing(
    side: usize,
    boundary: Mobility,
    n: usize,
) -> Result<MixingReport, OracleError> {
    if side == 0 || side > MAX_EXACT_SIDE {
        return Err(OracleError::TooLarge(format!(
            "grid side {side} outside 1..={MAX_EXACT_SIDE}"
        )));
    }
    let kernel = MoveKernel::new(side, boundary);
    let eps = (n.max(2) as f64).powi(-10).max(EPS_FLOOR);
    let t_max = 400 * (side * side) as u64 + 1000;
    Ok(MixingReport {
        side,
        boundary,
        t_quarter: mixing_time_iterate(&kernel, 0.25, t_max),
        eps,
        t_eps: mixing_time_iterate(&kernel, eps, t_max),
    })
}
