//! Conductance of the degree-normalized walk on small graphs, by exhaustive
//! subset enumeration.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::model::Point;
use crate::rng::derive_stream;

/// Largest graph accepted by [`conductance_exact`].
pub const MAX_EXACT_NODES: usize = 20;

/// Undirected graph with optional geometric embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RggGraph {
    pub positions: Vec<Point>,
    pub radius: f64,
    pub neighbors: Vec<Vec<usize>>,
}

impl RggGraph {
    /// Connects every pair of points within `radius` of each other.
    pub fn geometric(positions: Vec<Point>, radius: f64) -> Self {
        let n = positions.len();
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if positions[i].dist(positions[j]) <= radius {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
        }
        RggGraph {
            positions,
            radius,
            neighbors,
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            assert!(a != b && a < n && b < n, "bad edge ({a}, {b})");
            if !neighbors[a].contains(&b) {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        RggGraph {
            positions: Vec::new(),
            radius: f64::NAN,
            neighbors,
        }
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        Self::from_edges(n, &edges)
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edges(n, &[])
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Transition probability `P_ij = 1/d_i` on edges, 0 elsewhere.
    pub fn transition(&self, i: usize, j: usize) -> f64 {
        if self.neighbors[i].contains(&j) {
            1.0 / self.degree(i) as f64
        } else {
            0.0
        }
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Same graph with node `i` renamed `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let n = self.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for &j in &self.neighbors[i] {
                if i < j {
                    edges.push((perm[i], perm[j]));
                }
            }
        }
        Self::from_edges(n, &edges)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conductance {
    pub phi: f64,
    /// A minimizing subset as a bit mask over node ids.
    pub argmin: u32,
    pub connected: bool,
}

/// Minimum over non-empty `B` with `|B| ≤ n/2` of
/// `Σ_{i∈B, j∉B} P_ij / |B|`. Disconnected graphs give 0.
pub fn conductance_exact(graph: &RggGraph) -> Result<Conductance, OracleError> {
    let n = graph.len();
    if n > MAX_EXACT_NODES {
        return Err(OracleError::TooLarge(format!(
            "{n} nodes; exhaustive conductance allows at most {MAX_EXACT_NODES}"
        )));
    }
    if n < 2 {
        return Err(OracleError::Precondition(
            "conductance needs at least two nodes".into(),
        ));
    }
    let adj: Vec<u32> = graph
        .neighbors
        .iter()
        .map(|list| list.iter().fold(0u32, |m, &j| m | (1 << j)))
        .collect();
    let inv_deg: Vec<f64> = (0..n)
        .map(|i| match graph.degree(i) {
            0 => 0.0,
            d => 1.0 / d as f64,
        })
        .collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = (f64::INFINITY, 0u32);
    for mask in 1..=full {
        let size = mask.count_ones() as usize;
        if size > n / 2 {
            continue;
        }
        let mut flow = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            flow += (adj[i] & !mask & full).count_ones() as f64 * inv_deg[i];
        }
        let value = flow / size as f64;
        if value < best.0 {
            best = (value, mask);
        }
    }
    Ok(Conductance {
        phi: best.0,
        argmin: best.1,
        connected: graph.is_connected(),
    })
}

/// Radius `sqrt(32 ln n / n)`.
pub fn rgg_radius(n: usize) -> f64 {
    let n = n as f64;
    (32.0 * n.ln() / n).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RggRow {
    pub n: usize,
    pub seed: u64,
    pub radius: f64,
    pub phi: f64,
    /// `phi / radius`.
    pub ratio: f64,
    pub connected: bool,
}

/// Exact conductance of random geometric graphs with `n` uniform points and
/// the given radius rule, one row per `(n, seed)`.
pub fn rgg_conductance_scaling(
    n_values: &[usize],
    seeds: &[u64],
    radius: impl Fn(usize) -> f64,
) -> Result<Vec<RggRow>, OracleError> {
    let mut rows = Vec::new();
    for &n in n_values {
        let r = radius(n);
        for &seed in seeds {
            let mut rng = derive_stream(seed, &format!("rgg.{n}"));
            let pts: Vec<Point> = (0..n)
                .map(|_| Point {
                    x: rng.gen(),
                    y: rng.gen(),
                })
                .collect();
            let g = RggGraph::geometric(pts, r);
            let c = conductance_exact(&g)?;
            rows.push(RggRow {
                n,
                seed,
                radius: r,
                phi: c.phi,
                ratio: c.phi / r,
                connected: c.connected,
            });
        }
    }
    Ok(rows)
}
