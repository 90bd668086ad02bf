//! Subsquare random-walk mobility.
//!
//! The unit square is cut into an `s × s` grid. Each slot a node picks one of
//! the nine moves (stay or one of the eight neighbours) with probability 1/9,
//! then draws a fresh uniform position inside its resulting cell.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Mobility;
use crate::model::{Cell, NodeState, Point};

/// The nine moves, `(d_row, d_col)`, stay first.
pub const MOVES: [(i32, i32); 9] = [
    (0, 0),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveKernel {
    pub side: usize,
    pub boundary: Mobility,
}

impl MoveKernel {
    pub fn new(side: usize, boundary: Mobility) -> Self {
        assert!(side >= 1, "grid side must be positive");
        MoveKernel { side, boundary }
    }

    pub fn cells(&self) -> usize {
        self.side * self.side
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.side as f64
    }

    /// Destination of `mv` from `cell` under this kernel's boundary rule.
    pub fn apply(&self, cell: Cell, mv: (i32, i32)) -> Cell {
        let s = self.side as i64;
        let r = cell.row as i64 + mv.0 as i64;
        let c = cell.col as i64 + mv.1 as i64;
        match self.boundary {
            Mobility::Static => cell,
            Mobility::TorusWrap => Cell::new(r.rem_euclid(s) as usize, c.rem_euclid(s) as usize),
            Mobility::EdgeStay => {
                if (0..s).contains(&r) && (0..s).contains(&c) {
                    Cell::new(r as usize, c as usize)
                } else {
                    cell
                }
            }
        }
    }

    /// One draw of the kernel from `cell`.
    pub fn step<R: Rng + ?Sized>(&self, cell: Cell, rng: &mut R) -> Cell {
        if self.boundary == Mobility::Static {
            return cell;
        }
        self.apply(cell, MOVES[rng.gen_range(0..MOVES.len())])
    }

    /// Exact outgoing distribution of `cell` as `(destination index, mass)`,
    /// merged by destination and sorted by index.
    pub fn row(&self, cell: Cell) -> Vec<(usize, f64)> {
        if self.boundary == Mobility::Static {
            return vec![(cell.index(self.side), 1.0)];
        }
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(9);
        for mv in MOVES {
            let dest = self.apply(cell, mv).index(self.side);
            match out.iter_mut().find(|(d, _)| *d == dest) {
                Some((_, p)) => *p += 1.0 / 9.0,
                None => out.push((dest, 1.0 / 9.0)),
            }
        }
        out.sort_by_key(|(d, _)| *d);
        out
    }

    /// Dense row-major `m × m` transition matrix.
    pub fn dense_matrix(&self) -> Vec<f64> {
        let m = self.cells();
        let mut p = vec![0.0; m * m];
        for idx in 0..m {
            let cell = Cell::new(idx / self.side, idx % self.side);
            for (dest, mass) in self.row(cell) {
                p[idx * m + dest] += mass;
            }
        }
        p
    }

    pub fn cell_of(&self, pos: Point) -> Cell {
        let s = self.side;
        let clamp = |u: f64| ((u * s as f64).floor().max(0.0) as usize).min(s - 1);
        Cell::new(clamp(pos.y), clamp(pos.x))
    }

    /// Uniform point inside `cell`.
    pub fn sample_in<R: Rng + ?Sized>(&self, cell: Cell, rng: &mut R) -> Point {
        let w = self.cell_width();
        Point {
            x: (cell.col as f64 + rng.gen::<f64>()) * w,
            y: (cell.row as f64 + rng.gen::<f64>()) * w,
        }
    }

    pub fn contains(&self, cell: Cell, pos: Point) -> bool {
        let w = self.cell_width();
        let inside =
            |u: f64, c: u32| u >= c as f64 * w - 1e-12 && u <= (c as f64 + 1.0) * w + 1e-12;
        inside(pos.x, cell.col) && inside(pos.y, cell.row)
    }
}

/// `n` nodes placed uniformly in the unit square, none holding messages.
pub fn place_uniform<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    kernel: &MoveKernel,
    rng: &mut R,
) -> Vec<NodeState> {
    (0..n)
        .map(|id| {
            let pos = Point {
                x: rng.gen::<f64>(),
                y: rng.gen::<f64>(),
            };
            NodeState::new(id, k, kernel.cell_of(pos), pos)
        })
        .collect()
}

/// Advances every node by one kernel draw and resamples its position inside
/// the resulting cell. Nodes draw in id order: move, then x, then y.
pub fn step_all<R: Rng + ?Sized>(states: &mut [NodeState], kernel: &MoveKernel, rng: &mut R) {
    if kernel.boundary == Mobility::Static {
        return;
    }
    for node in states.iter_mut() {
        node.cell = kernel.step(node.cell, rng);
        node.pos = kernel.sample_in(node.cell, rng);
    }
}

/// Total-variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Runs `trials` independent walks of `t` steps from cell (0,0) and returns
/// the TV distance from the empirical end-cell distribution to uniform.
pub fn empirical_tv_to_uniform<R: Rng + ?Sized>(
    kernel: &MoveKernel,
    t: u64,
    trials: usize,
    rng: &mut R,
) -> f64 {
    empirical_tv_from(kernel, Cell::new(0, 0), t, trials, rng)
}

pub fn empirical_tv_from<R: Rng + ?Sized>(
    kernel: &MoveKernel,
    start: Cell,
    t: u64,
    trials: usize,
    rng: &mut R,
) -> f64 {
    assert!(trials >= 1);
    let m = kernel.cells();
    let mut counts = vec![0u64; m];
    for _ in 0..trials {
        let mut cell = start;
        for _ in 0..t {
            cell = kernel.step(cell, rng);
        }
        counts[cell.index(kernel.side)] += 1;
    }
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    total_variation(&empirical, &vec![1.0 / m as f64; m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    #[test]
    fn single_cell_only_resamples_position() {
        let k = MoveKernel::new(1, Mobility::EdgeStay);
        let mut rng = derive_stream(1, "t");
        let mut nodes = place_uniform(20, 1, &k, &mut rng);
        let before: Vec<_> = nodes.iter().map(|n| n.pos).collect();
        step_all(&mut nodes, &k, &mut rng);
        for (node, old) in nodes.iter().zip(before) {
            assert_eq!(node.cell, Cell::new(0, 0));
            assert_ne!(node.pos, old);
        }
    }

    #[test]
    fn torus_moves_are_uniform() {
        let k = MoveKernel::new(5, Mobility::TorusWrap);
        let mut rng = derive_stream(2, "torus");
        let draws = 1_000_000;
        let mut counts = [0usize; 9];
        let start = Cell::new(0, 0);
        for _ in 0..draws {
            let c = k.step(start, &mut rng);
            let dr = (c.row as i32 + 2).rem_euclid(5) - 2;
            let dc = (c.col as i32 + 2).rem_euclid(5) - 2;
            let idx = MOVES.iter().position(|&m| m == (dr, dc)).unwrap();
            counts[idx] += 1;
        }
        for c in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 1.0 / 9.0).abs() < 0.002, "frequency {f}");
        }
    }

    #[test]
    fn corner_folds_five_moves_into_stay() {
        let k = MoveKernel::new(4, Mobility::EdgeStay);
        let row = k.row(Cell::new(0, 0));
        assert_eq!(row.len(), 4);
        let stay = row.iter().find(|(d, _)| *d == 0).unwrap().1;
        assert!((stay - 6.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn rows_sum_to_one() {
        for boundary in [Mobility::EdgeStay, Mobility::TorusWrap, Mobility::Static] {
            for side in [1, 2, 3, 6] {
                let k = MoveKernel::new(side, boundary);
                let p = k.dense_matrix();
                let m = k.cells();
                for r in 0..m {
                    let sum: f64 = p[r * m..(r + 1) * m].iter().sum();
                    assert!((sum - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn uniform_is_stationary_on_torus() {
        let k = MoveKernel::new(7, Mobility::TorusWrap);
        let m = k.cells();
        let p = k.dense_matrix();
        for col in 0..m {
            let mass: f64 = (0..m).map(|r| p[r * m + col] / m as f64).sum();
            assert!((mass - 1.0 / m as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn interior_rows_agree_across_boundaries() {
        let s = 8;
        let edge = MoveKernel::new(s, Mobility::EdgeStay);
        let torus = MoveKernel::new(s, Mobility::TorusWrap);
        for r in 0..s {
            for c in 0..s {
                let cell = Cell::new(r, c);
                let interior = r >= 1 && c >= 1 && r + 1 < s && c + 1 < s;
                if interior {
                    assert_eq!(edge.row(cell), torus.row(cell));
                }
            }
        }
    }

    #[test]
    fn static_kernel_is_identity() {
        let k = MoveKernel::new(4, Mobility::Static);
        let mut rng = derive_stream(3, "s");
        let mut nodes = place_uniform(10, 1, &k, &mut rng);
        let before = nodes.clone();
        step_all(&mut nodes, &k, &mut rng);
        assert_eq!(nodes, before);
    }

    #[test]
    fn positions_stay_in_their_cells() {
        let k = MoveKernel::new(6, Mobility::EdgeStay);
        let mut rng = derive_stream(4, "p");
        let mut nodes = place_uniform(200, 1, &k, &mut rng);
        for _ in 0..50 {
            step_all(&mut nodes, &k, &mut rng);
            for n in &nodes {
                assert!(k.contains(n.cell, n.pos));
            }
        }
    }

    #[test]
    fn tv_at_zero_steps_is_point_mass() {
        let k = MoveKernel::new(4, Mobility::TorusWrap);
        let mut rng = derive_stream(5, "tv");
        let tv = empirical_tv_to_uniform(&k, 0, 100, &mut rng);
        assert!((tv - (1.0 - 1.0 / 16.0)).abs() < 1e-12);
    }

    #[test]
    fn tv_on_single_cell_is_zero() {
        let k = MoveKernel::new(1, Mobility::EdgeStay);
        let mut rng = derive_stream(6, "tv");
        for t in [0, 1, 5] {
            assert_eq!(empirical_tv_to_uniform(&k, t, 50, &mut rng), 0.0);
        }
    }
}
