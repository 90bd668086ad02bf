//! UNICAST physical layer: sender designation, nearest-receiver pairing and
//! reception under either the SINR model or a constant success probability.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{PhyMode, SimConfig};
use crate::mobility::{place_uniform, step_all, MoveKernel};
use crate::model::Point;

/// Distances below this are floored before computing `r^-alpha`.
pub const MIN_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Sender,
    Receiver,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub sender: usize,
    pub receiver: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhyParams {
    pub power: f64,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c_success: f64,
    pub mode: PhyMode,
}

impl PhyParams {
    pub fn from_config(c: &SimConfig) -> Self {
        PhyParams {
            power: c.effective_power(),
            eta: c.eta,
            alpha: c.alpha,
            beta: c.beta,
            c_success: c.c_success,
            mode: c.phy_mode,
        }
    }

    /// Received power at distance `r`.
    pub fn gain(&self, r: f64) -> f64 {
        self.power * r.max(MIN_DISTANCE).powf(-self.alpha)
    }
}

/// Each node independently becomes a sender with probability `theta`.
pub fn designate<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> Vec<Role> {
    (0..n)
        .map(|_| {
            if rng.gen::<f64>() < theta {
                Role::Sender
            } else {
                Role::Receiver
            }
        })
        .collect()
}

/// Bucket grid over the unit square holding one class of points.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    side: usize,
    width: f64,
    starts: Vec<usize>,
    entries: Vec<(usize, Point)>,
}

impl SpatialGrid {
    /// Builds an index over `points`; the grid is sized for about two points
    /// per bucket.
    pub fn build(points: impl IntoIterator<Item = (usize, Point)>) -> Self {
        let items: Vec<(usize, Point)> = points.into_iter().collect();
        let side = ((items.len() as f64 / 2.0).sqrt().floor() as usize).clamp(1, 2048);
        let width = 1.0 / side as f64;
        let bucket = |p: Point| {
            let clamp = |u: f64| ((u / width).floor().max(0.0) as usize).min(side - 1);
            clamp(p.y) * side + clamp(p.x)
        };
        let mut counts = vec![0usize; side * side + 1];
        for (_, p) in &items {
            counts[bucket(*p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut entries = vec![(0, Point { x: 0.0, y: 0.0 }); items.len()];
        for (id, p) in items {
            let b = bucket(p);
            entries[fill[b]] = (id, p);
            fill[b] += 1;
        }
        SpatialGrid {
            side,
            width,
            starts,
            entries,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn bucket_coords(&self, p: Point) -> (i64, i64) {
        let clamp = |u: f64| ((u / self.width).floor().max(0.0) as i64).min(self.side as i64 - 1);
        (clamp(p.y), clamp(p.x))
    }

    fn visit_bucket(&self, row: i64, col: i64, target: Point, best: &mut Option<(f64, usize)>) {
        let s = self.side as i64;
        if row < 0 || col < 0 || row >= s || col >= s {
            return;
        }
        let b = (row * s + col) as usize;
        for &(id, p) in &self.entries[self.starts[b]..self.starts[b + 1]] {
            let d2 = p.dist2(target);
            let better = match *best {
                None => true,
                Some((bd, bid)) => d2 < bd || (d2 == bd && id < bid),
            };
            if better {
                *best = Some((d2, id));
            }
        }
    }

    /// Nearest indexed point to `target` as `(id, distance)`; ties go to the
    /// lower id. Searches square rings of buckets outward from the target's
    /// bucket until no unvisited bucket can hold a closer point.
    pub fn nearest(&self, target: Point) -> Option<(usize, f64)> {
        if self.entries.is_empty() {
            return None;
        }
        let (r0, c0) = self.bucket_coords(target);
        let mut best: Option<(f64, usize)> = None;
        for ring in 0..=(self.side as i64) {
            if let Some((bd, _)) = best {
                // Every point in ring `ring` is at least (ring-1) widths away.
                let lower = (ring - 1).max(0) as f64 * self.width;
                if lower * lower > bd {
                    break;
                }
            }
            if ring == 0 {
                self.visit_bucket(r0, c0, target, &mut best);
                continue;
            }
            for d in -ring..=ring {
                self.visit_bucket(r0 - ring, c0 + d, target, &mut best);
                self.visit_bucket(r0 + ring, c0 + d, target, &mut best);
            }
            for d in (-ring + 1)..ring {
                self.visit_bucket(r0 + d, c0 - ring, target, &mut best);
                self.visit_bucket(r0 + d, c0 + ring, target, &mut best);
            }
        }
        best.map(|(d2, id)| (id, d2.sqrt()))
    }
}

/// Pairs every sender with its nearest receiver. Output is ordered by sender
/// id; empty when there are no receivers.
pub fn pair_nearest(roles: &[Role], positions: &[Point]) -> Vec<Pairing> {
    assert_eq!(roles.len(), positions.len());
    let grid = receiver_grid(roles, positions);
    if grid.is_empty() {
        return Vec::new();
    }
    roles
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == Role::Sender)
        .map(|(sender, _)| {
            let (receiver, distance) = grid.nearest(positions[sender]).expect("non-empty grid");
            Pairing {
                sender,
                receiver,
                distance,
            }
        })
        .collect()
}

/// Per-node neighbour order for networks that never move.
///
/// Each node keeps its `depth` closest other nodes sorted by `(distance,
/// id)`, so its nearest receiver is the first receiver in that list. Nodes
/// whose list holds no receiver fall back to a full grid search, which keeps
/// [`NeighborCache::pair`] identical to [`pair_nearest`].
#[derive(Debug, Clone)]
pub struct NeighborCache {
    depth: usize,
    order: Vec<u32>,
    dist: Vec<f64>,
}

impl NeighborCache {
    pub const DEFAULT_DEPTH: usize = 24;

    pub fn new(positions: &[Point], depth: usize) -> Self {
        let n = positions.len();
        let depth = depth.min(n.saturating_sub(1));
        let mut order = Vec::with_capacity(n * depth);
        let mut dist = Vec::with_capacity(n * depth);
        let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(n);
        for (i, &p) in positions.iter().enumerate() {
            scratch.clear();
            scratch.extend(
                positions
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(j, &q)| (q.dist2(p), j)),
            );
            if depth < scratch.len() {
                scratch.select_nth_unstable_by(depth, |a, b| {
                    a.partial_cmp(b).expect("finite distances")
                });
                scratch.truncate(depth);
            }
            scratch.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
            for &(d2, j) in &scratch {
                order.push(j as u32);
                dist.push(d2.sqrt());
            }
        }
        NeighborCache { depth, order, dist }
    }

    /// Same result as [`pair_nearest`] for the positions the cache was built
    /// from.
    pub fn pair(&self, roles: &[Role], positions: &[Point]) -> Vec<Pairing> {
        let mut fallback: Option<SpatialGrid> = None;
        let mut out = Vec::new();
        if !roles.contains(&Role::Receiver) {
            return out;
        }
        for (sender, _) in roles
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Role::Sender)
        {
            let base = sender * self.depth;
            let hit = (base..base + self.depth)
                .find(|&at| roles[self.order[at] as usize] == Role::Receiver);
            let (receiver, distance) = match hit {
                Some(at) => (self.order[at] as usize, self.dist[at]),
                None => fallback
                    .get_or_insert_with(|| receiver_grid(roles, positions))
                    .nearest(positions[sender])
                    .expect("a receiver exists"),
            };
            out.push(Pairing {
                sender,
                receiver,
                distance,
            });
        }
        out
    }
}

fn receiver_grid(roles: &[Role], positions: &[Point]) -> SpatialGrid {
    SpatialGrid::build(
        roles
            .iter()
            .zip(positions)
            .enumerate()
            .filter(|(_, (r, _))| **r == Role::Receiver)
            .map(|(i, (_, p))| (i, *p)),
    )
}

/// SINR of each pairing when all listed senders transmit at once.
pub fn sinr_values(pairings: &[Pairing], positions: &[Point], params: &PhyParams) -> Vec<f64> {
    let one = |p: &Pairing| {
        let rx = positions[p.receiver];
        let signal = params.gain(p.distance);
        let interference: f64 = pairings
            .iter()
            .filter(|q| q.sender != p.sender)
            .map(|q| params.gain(positions[q.sender].dist(rx)))
            .sum();
        signal / (params.eta + interference)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if pairings.len() >= 512 {
            return pairings.par_iter().map(one).collect();
        }
    }
    pairings.iter().map(one).collect()
}

/// Keeps at most one success per receiver: the candidate with the largest
/// score wins, ties going to the lower sender id.
fn keep_best_per_receiver(pairings: &[Pairing], ok: &mut [bool], score: &[f64]) {
    let mut winner: BTreeMap<usize, usize> = BTreeMap::new();
    for (idx, p) in pairings.iter().enumerate() {
        if !ok[idx] {
            continue;
        }
        match winner.get(&p.receiver) {
            None => {
                winner.insert(p.receiver, idx);
            }
            Some(&cur) => {
                let better = score[idx] > score[cur]
                    || (score[idx] == score[cur] && p.sender < pairings[cur].sender);
                if better {
                    ok[cur] = false;
                    winner.insert(p.receiver, idx);
                } else {
                    ok[idx] = false;
                }
            }
        }
    }
}

/// Success flags under the SINR model: a pairing succeeds iff its SINR is at
/// least `beta`, and then only the highest-SINR sender per receiver delivers.
pub fn resolve_sinr(pairings: &[Pairing], positions: &[Point], params: &PhyParams) -> Vec<bool> {
    let sinr = sinr_values(pairings, positions, params);
    let mut ok: Vec<bool> = sinr.iter().map(|&s| s >= params.beta).collect();
    keep_best_per_receiver(pairings, &mut ok, &sinr);
    ok
}

/// Success flags when each pairing independently succeeds with probability
/// `c_success`; receivers with several successes keep one chosen uniformly.
pub fn resolve_bernoulli<R: Rng + ?Sized>(
    pairings: &[Pairing],
    params: &PhyParams,
    rng: &mut R,
) -> Vec<bool> {
    let mut ok: Vec<bool> = pairings
        .iter()
        .map(|_| rng.gen::<f64>() < params.c_success)
        .collect();
    // Contenders grouped by receiver in ascending receiver order, pairing
    // order within a group.
    let mut hits: Vec<(usize, usize)> = (0..pairings.len())
        .filter(|&idx| ok[idx])
        .map(|idx| (pairings[idx].receiver, idx))
        .collect();
    hits.sort_unstable();
    for group in hits.chunk_by(|a, b| a.0 == b.0).filter(|g| g.len() > 1) {
        let keep = group[rng.gen_range(0..group.len())].1;
        for &(_, idx) in group {
            ok[idx] = idx == keep;
        }
    }
    ok
}

/// Outcome of [`estimate_success_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub pairings: u64,
    /// Pairings with SINR ≥ beta.
    pub above_threshold: u64,
    /// Pairings that delivered after the one-per-receiver rule.
    pub delivered: u64,
}

impl SuccessEstimate {
    /// Per-pair success probability, the quantity bernoulli mode's
    /// `c_success` stands in for.
    pub fn rate(&self) -> f64 {
        if self.pairings == 0 {
            0.0
        } else {
            self.above_threshold as f64 / self.pairings as f64
        }
    }

    pub fn delivered_rate(&self) -> f64 {
        if self.pairings == 0 {
            0.0
        } else {
            self.delivered as f64 / self.pairings as f64
        }
    }
}

/// Runs designation, pairing and SINR resolution on a mobile population for
/// `slots` slots with every sender transmitting.
pub fn estimate_success_constant<R: Rng + ?Sized>(
    config: &SimConfig,
    slots: u64,
    rng: &mut R,
) -> SuccessEstimate {
    let kernel = MoveKernel::new(config.grid_side(), config.mobility);
    let params = PhyParams::from_config(config);
    let mut nodes = place_uniform(config.n, 1, &kernel, rng);
    let mut est = SuccessEstimate {
        pairings: 0,
        above_threshold: 0,
        delivered: 0,
    };
    for _ in 0..slots {
        step_all(&mut nodes, &kernel, rng);
        let positions: Vec<Point> = nodes.iter().map(|n| n.pos).collect();
        let roles = designate(config.n, config.theta, rng);
        let pairings = pair_nearest(&roles, &positions);
        let sinr = sinr_values(&pairings, &positions, &params);
        let mut ok: Vec<bool> = sinr.iter().map(|&s| s >= params.beta).collect();
        est.pairings += pairings.len() as u64;
        est.above_threshold += ok.iter().filter(|&&b| b).count() as u64;
        keep_best_per_receiver(&pairings, &mut ok, &sinr);
        est.delivered += ok.iter().filter(|&&b| b).count() as u64;
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    fn pt(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    fn params(power: f64, eta: f64, beta: f64) -> PhyParams {
        PhyParams {
            power,
            eta,
            alpha: 4.0,
            beta,
            c_success: 0.5,
            mode: PhyMode::Sinr,
        }
    }

    #[test]
    fn tiny_theta_gives_all_receivers() {
        let mut rng = derive_stream(1, "roles");
        let roles = designate(10_000, 1e-12, &mut rng);
        assert!(roles.iter().all(|&r| r == Role::Receiver));
    }

    #[test]
    fn sender_fraction_tracks_theta() {
        let mut rng = derive_stream(2, "roles");
        let roles = designate(100_000, 0.3, &mut rng);
        let f = roles.iter().filter(|&&r| r == Role::Sender).count() as f64 / 1e5;
        assert!((f - 0.3).abs() < 0.005, "{f}");
    }

    #[test]
    fn designation_is_deterministic() {
        let a = designate(500, 0.3, &mut derive_stream(9, "roles"));
        let b = designate(500, 0.3, &mut derive_stream(9, "roles"));
        assert_eq!(a, b);
    }

    #[test]
    fn pairs_with_unique_nearest() {
        let roles = [Role::Sender, Role::Receiver, Role::Receiver];
        let pos = [pt(0.1, 0.1), pt(0.2, 0.1), pt(0.4, 0.1)];
        let p = pair_nearest(&roles, &pos);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].receiver, 1);
        assert!((p[0].distance - 0.1).abs() < 1e-12);
    }

    #[test]
    fn equidistant_receivers_pick_lower_id() {
        let mut roles = vec![Role::Receiver; 8];
        let mut pos = vec![pt(0.9, 0.9); 8];
        roles[0] = Role::Sender;
        pos[0] = pt(0.5, 0.5);
        pos[3] = pt(0.25, 0.5);
        pos[7] = pt(0.75, 0.5);
        let p = pair_nearest(&roles, &pos);
        assert_eq!(p[0].receiver, 3);
    }

    #[test]
    fn no_receivers_no_pairings() {
        let roles = [Role::Sender; 4];
        let pos = [pt(0.1, 0.1); 4];
        assert!(pair_nearest(&roles, &pos).is_empty());
    }

    #[test]
    fn coincident_points_still_pair() {
        let roles = [Role::Sender, Role::Receiver];
        let pos = [pt(0.3, 0.3), pt(0.3, 0.3)];
        let p = pair_nearest(&roles, &pos);
        assert_eq!(p[0].distance, 0.0);
        let sinr = sinr_values(&p, &pos, &params(1.0, 1.0, 1.0));
        assert!(sinr[0].is_finite());
    }

    fn brute_nearest(roles: &[Role], pos: &[Point]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, r) in roles.iter().enumerate() {
            if *r != Role::Sender {
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            for (j, rj) in roles.iter().enumerate() {
                if *rj != Role::Receiver {
                    continue;
                }
                let d = pos[i].dist2(pos[j]);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            if let Some((_, j)) = best {
                out.push((i, j));
            }
        }
        out
    }

    #[test]
    fn grid_pairing_matches_brute_force() {
        for seed in 0..20 {
            let mut rng = derive_stream(seed, "pairs");
            let n = 200;
            let pos: Vec<Point> = (0..n).map(|_| pt(rng.gen(), rng.gen())).collect();
            let roles = designate(n, 0.3, &mut rng);
            let fast: Vec<(usize, usize)> = pair_nearest(&roles, &pos)
                .iter()
                .map(|p| (p.sender, p.receiver))
                .collect();
            assert_eq!(fast, brute_nearest(&roles, &pos));
        }
    }

    #[test]
    fn neighbor_cache_matches_grid_pairing() {
        for seed in 0..20 {
            let mut rng = derive_stream(seed, "cache");
            let n = 300;
            let pos: Vec<Point> = (0..n).map(|_| pt(rng.gen(), rng.gen())).collect();
            // Shallow depth forces the fallback path on some slots.
            for depth in [1, 3, NeighborCache::DEFAULT_DEPTH] {
                let cache = NeighborCache::new(&pos, depth);
                for theta in [0.3, 0.9] {
                    let roles = designate(n, theta, &mut rng);
                    assert_eq!(cache.pair(&roles, &pos), pair_nearest(&roles, &pos));
                }
            }
        }
    }

    #[test]
    fn neighbor_cache_handles_degenerate_roles() {
        let pos = vec![pt(0.1, 0.1), pt(0.2, 0.2)];
        let cache = NeighborCache::new(&pos, 8);
        assert!(cache.pair(&[Role::Sender, Role::Sender], &pos).is_empty());
        assert!(cache
            .pair(&[Role::Receiver, Role::Receiver], &pos)
            .is_empty());
        let p = cache.pair(&[Role::Sender, Role::Receiver], &pos);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].receiver, 1);
    }

    #[test]
    fn lone_sender_sinr_matches_formula() {
        let roles = [Role::Sender, Role::Receiver];
        let pos = [pt(0.0, 0.0), pt(1.0, 0.0)];
        let p = pair_nearest(&roles, &pos);
        let prm = params(1.0, 1.0, 1.0);
        assert!((sinr_values(&p, &pos, &prm)[0] - 1.0).abs() < 1e-15);
        assert_eq!(resolve_sinr(&p, &pos, &prm), vec![true]);
        assert_eq!(resolve_sinr(&p, &pos, &params(1.0, 1.0, 1.01)), vec![false]);
    }

    #[test]
    fn equidistant_interferers_both_fail() {
        let pos = [pt(0.4, 0.5), pt(0.6, 0.5), pt(0.5, 0.5)];
        let pairings = [
            Pairing {
                sender: 0,
                receiver: 2,
                distance: 0.1,
            },
            Pairing {
                sender: 1,
                receiver: 2,
                distance: 0.1,
            },
        ];
        let prm = params(1.0, 0.0, 2.0);
        let sinr = sinr_values(&pairings, &pos, &prm);
        for s in &sinr {
            assert!((s - 1.0).abs() < 1e-9);
        }
        assert_eq!(resolve_sinr(&pairings, &pos, &prm), vec![false, false]);
    }

    #[test]
    fn shared_receiver_keeps_strongest() {
        let pos = [pt(0.45, 0.5), pt(0.8, 0.5), pt(0.5, 0.5)];
        let pairings = [
            Pairing {
                sender: 0,
                receiver: 2,
                distance: 0.05,
            },
            Pairing {
                sender: 1,
                receiver: 2,
                distance: 0.3,
            },
        ];
        // β tiny so both clear the threshold before conflict resolution.
        let prm = params(1.0, 0.0, 1e-6);
        assert_eq!(resolve_sinr(&pairings, &pos, &prm), vec![true, false]);
    }

    fn sinr_oracle(pairings: &[Pairing], pos: &[Point], prm: &PhyParams) -> Vec<bool> {
        // Direct SINR formula for every pair, no shared code with sinr_values.
        pairings
            .iter()
            .map(|p| {
                let d = ((pos[p.sender].x - pos[p.receiver].x).powi(2)
                    + (pos[p.sender].y - pos[p.receiver].y).powi(2))
                .sqrt();
                let s = prm.power * d.max(MIN_DISTANCE).powf(-prm.alpha);
                let mut i = 0.0;
                for q in pairings {
                    if q.sender == p.sender {
                        continue;
                    }
                    let dq = ((pos[q.sender].x - pos[p.receiver].x).powi(2)
                        + (pos[q.sender].y - pos[p.receiver].y).powi(2))
                    .sqrt();
                    i += prm.power * dq.max(MIN_DISTANCE).powf(-prm.alpha);
                }
                s / (prm.eta + i) >= prm.beta
            })
            .collect()
    }

    #[test]
    fn sinr_threshold_matches_direct_evaluation() {
        for seed in 0..10 {
            let mut rng = derive_stream(seed, "sinr");
            let n = 100;
            let pos: Vec<Point> = (0..n).map(|_| pt(rng.gen(), rng.gen())).collect();
            let roles = designate(n, 0.3, &mut rng);
            let pairings = pair_nearest(&roles, &pos);
            let prm = params(
                crate::config::calibrated_power(n, 0.3, 4.0, 2.0, 1.0),
                1.0,
                2.0,
            );
            let sinr = sinr_values(&pairings, &pos, &prm);
            let above: Vec<bool> = sinr.iter().map(|&s| s >= prm.beta).collect();
            assert_eq!(above, sinr_oracle(&pairings, &pos, &prm));
            // After conflict resolution, successes are a subset of the oracle's.
            let resolved = resolve_sinr(&pairings, &pos, &prm);
            for (r, o) in resolved.iter().zip(&above) {
                assert!(!r || *o);
            }
        }
    }

    #[test]
    fn bernoulli_extremes() {
        let pairings: Vec<Pairing> = (0..10)
            .map(|i| Pairing {
                sender: i,
                receiver: 10 + i,
                distance: 0.1,
            })
            .collect();
        let mut rng = derive_stream(3, "b");
        let mut prm = params(1.0, 1.0, 1.0);
        prm.c_success = 1.0;
        assert!(resolve_bernoulli(&pairings, &prm, &mut rng)
            .iter()
            .all(|&b| b));
        prm.c_success = 0.0;
        assert!(resolve_bernoulli(&pairings, &prm, &mut rng)
            .iter()
            .all(|&b| !b));
    }

    #[test]
    fn bernoulli_conflict_is_fair() {
        let pairings = [
            Pairing {
                sender: 0,
                receiver: 2,
                distance: 0.1,
            },
            Pairing {
                sender: 1,
                receiver: 2,
                distance: 0.1,
            },
        ];
        let mut prm = params(1.0, 1.0, 1.0);
        prm.c_success = 1.0;
        let mut rng = derive_stream(4, "fair");
        let trials = 100_000;
        let mut first = 0;
        for _ in 0..trials {
            let ok = resolve_bernoulli(&pairings, &prm, &mut rng);
            assert!(ok[0] ^ ok[1]);
            if ok[0] {
                first += 1;
            }
        }
        let f = first as f64 / trials as f64;
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }

    #[test]
    fn receiver_uniqueness_holds() {
        for seed in 0..10 {
            let mut rng = derive_stream(seed, "uniq");
            let n = 300;
            let pos: Vec<Point> = (0..n).map(|_| pt(rng.gen(), rng.gen())).collect();
            let roles = designate(n, 0.45, &mut rng);
            let pairings = pair_nearest(&roles, &pos);
            let mut prm = params(1.0, 0.0, 1e-9);
            prm.c_success = 0.9;
            for ok in [
                resolve_sinr(&pairings, &pos, &prm),
                resolve_bernoulli(&pairings, &prm, &mut rng),
            ] {
                let mut seen = std::collections::HashSet::new();
                for (p, f) in pairings.iter().zip(ok) {
                    if f {
                        assert!(seen.insert(p.receiver));
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_relation_is_symmetric_in_distribution() {
        // Over random placements, "1 is 0's nearest receiver" and "0 is 1's
        // nearest receiver" are equally likely.
        let mut rng = derive_stream(11, "sym");
        let n = 6;
        let trials = 200_000;
        let (mut a, mut b) = (0u64, 0u64);
        for _ in 0..trials {
            let pos: Vec<Point> = (0..n).map(|_| pt(rng.gen(), rng.gen())).collect();
            let roles = designate(n, 0.4, &mut rng);
            for p in pair_nearest(&roles, &pos) {
                if p.sender == 0 && p.receiver == 1 {
                    a += 1;
                }
                if p.sender == 1 && p.receiver == 0 {
                    b += 1;
                }
            }
        }
        // Under equality, a - b has standard deviation about sqrt(a + b).
        let z = (a as f64 - b as f64).abs() / ((a + b) as f64).sqrt();
        assert!(z < 4.0, "a={a} b={b}");
    }

    #[test]
    fn lone_sender_almost_always_succeeds() {
        let cfg = crate::config::validate(&SimConfig::new(512, 1, 1.0 / 8.0)).unwrap();
        let prm = PhyParams::from_config(&cfg);
        let mut rng = derive_stream(5, "lone");
        let mut ok = 0;
        let trials = 2000;
        for _ in 0..trials {
            let pos: Vec<Point> = (0..cfg.n).map(|_| pt(rng.gen(), rng.gen())).collect();
            let mut roles = designate(cfg.n, 0.3, &mut rng);
            // Force a single sender.
            for r in roles.iter_mut() {
                *r = Role::Receiver;
            }
            roles[0] = Role::Sender;
            let p = pair_nearest(&roles, &pos);
            if resolve_sinr(&p, &pos, &prm)[0] {
                ok += 1;
            }
        }
        assert!(ok as f64 / trials as f64 > 0.95);
    }

    #[test]
    fn success_estimate_is_deterministic() {
        let mut cfg = SimConfig::new(128, 1, 1.0 / 8.0);
        cfg.phy_mode = PhyMode::Sinr;
        let cfg = crate::config::validate(&cfg).unwrap();
        let a = estimate_success_constant(&cfg, 5, &mut derive_stream(1, "phy"));
        let b = estimate_success_constant(&cfg, 5, &mut derive_stream(1, "phy"));
        assert_eq!(a, b);
        assert!(a.pairings > 0);
        assert!(a.delivered <= a.above_threshold);
    }
}
