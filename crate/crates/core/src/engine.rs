//! The slot loop: move, designate, pair, select, resolve, deliver, record.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{
    validate, ConfigError, InjectionSchedule, Mobility, PhyMode, SimConfig, StopCondition,
};
use crate::mobility::{place_uniform, step_all, MoveKernel};
use crate::model::{MessageId, NodeState, Point};
use crate::phy::{
    designate, pair_nearest, resolve_bernoulli, resolve_sinr, NeighborCache, Pairing, PhyParams,
};
use crate::protocol::{deliver, select, Parity};
use crate::rng::{derive_stream, RngStream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("strip profiles need a static network")]
    NotStatic,
}

/// Slots after the probe's injection that are sampled every slot,
/// regardless of the stride, so early spread is visible.
pub const POST_INJECTION_WINDOW: u64 = 64;

/// Width of the vertical strips used for spatial decay profiles.
pub fn strip_width(n: usize) -> f64 {
    let n = n.max(2) as f64;
    (32.0 * n.ln() / n).sqrt()
}

/// Number of strips covering the unit square.
pub fn strip_count(n: usize) -> usize {
    ((1.0 / strip_width(n)).ceil() as usize).max(1)
}

fn strip_of(x: f64, width: f64, count: usize) -> usize {
    ((x / width).floor().max(0.0) as usize).min(count - 1)
}

/// Counts holders of `msg` per strip, folded by distance from the strip
/// containing `origin`: entry 0 is the origin's strip, entry `d` collects
/// both strips `d` away.
pub fn folded_strip_counts(
    nodes: &[NodeState],
    msg: MessageId,
    origin: Point,
    n: usize,
) -> Vec<u32> {
    let width = strip_width(n);
    let count = strip_count(n);
    let src = strip_of(origin.x, width, count);
    let mut out = vec![0u32; count];
    for node in nodes.iter().filter(|nd| nd.has(msg)) {
        let idx = strip_of(node.pos.x, width, count);
        out[idx.abs_diff(src)] += 1;
    }
    out
}

/// Same folding as [`folded_strip_counts`] but counting every node.
pub fn folded_strip_population(nodes: &[NodeState], origin: Point, n: usize) -> Vec<u32> {
    let width = strip_width(n);
    let count = strip_count(n);
    let src = strip_of(origin.x, width, count);
    let mut out = vec![0u32; count];
    for node in nodes {
        out[strip_of(node.pos.x, width, count).abs_diff(src)] += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub sender: usize,
    pub receiver: usize,
    pub msg: MessageId,
    pub was_new: bool,
}

/// Everything that happened in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub slot: u64,
    pub pairings: Vec<Pairing>,
    /// Message chosen by each pairing's sender; `None` for senders holding
    /// nothing, which stay silent.
    pub carried: Vec<Option<MessageId>>,
    pub success: Vec<bool>,
    pub deliveries: Vec<Delivery>,
    pub new_deliveries: u32,
    pub wasted_deliveries: u32,
    /// Messages injected at the end of this slot.
    pub injected: Vec<MessageId>,
}

/// Recorded run metrics. Per-message vectors are indexed by message id;
/// sampled vectors are indexed like `sample_slots`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub n: usize,
    pub k: usize,
    /// Message whose spatial spread is tracked (the late message under late
    /// injection, message 0 otherwise).
    pub probe: usize,
    pub sample_slots: Vec<u64>,
    /// `N_i(t)` per sample.
    pub holders: Vec<Vec<u32>>,
    /// Cumulative wasted deliveries `F_i(t)` per sample.
    pub wasted: Vec<Vec<u64>>,
    /// Holders of the probe message per subsquare, per sample.
    pub probe_cells: Vec<Vec<u32>>,
    /// Folded strip profile of the probe per sample (static networks only).
    pub strip_profiles: Vec<Vec<u32>>,
    /// Successful deliveries per slot, slot 1 first.
    pub throughput: Vec<u32>,
    pub injected_at: Vec<Option<u64>>,
    /// Spreading time of each message, counted from its injection.
    pub completion: Vec<Option<u64>>,
    pub wasted_total: Vec<u64>,
    pub slots_run: u64,
    pub incomplete: bool,
}

impl MetricsSeries {
    pub fn max_completion(&self) -> Option<u64> {
        self.completion
            .iter()
            .copied()
            .collect::<Option<Vec<_>>>()?
            .into_iter()
            .max()
    }

    /// Median over the completed messages (lower median for even counts).
    pub fn median_completion(&self) -> Option<u64> {
        let mut done: Vec<u64> = self.completion.iter().flatten().copied().collect();
        if done.is_empty() {
            return None;
        }
        done.sort_unstable();
        Some(done[(done.len() - 1) / 2])
    }

    /// Index of the recorded sample closest to `slot` (earlier wins ties).
    pub fn nearest_sample(&self, slot: u64) -> Option<usize> {
        (0..self.sample_slots.len())
            .min_by_key(|&i| (self.sample_slots[i].abs_diff(slot), self.sample_slots[i]))
    }
}

struct Streams {
    mobility: RngStream,
    roles: RngStream,
    select: RngStream,
    phy: RngStream,
}

/// A running simulation.
pub struct World {
    config: SimConfig,
    kernel: MoveKernel,
    /// Neighbour order, built once when nodes never move.
    neighbors: Option<NeighborCache>,
    params: PhyParams,
    nodes: Vec<NodeState>,
    slot: u64,
    streams: Streams,
    holders: Vec<u32>,
    wasted: Vec<u64>,
    complete: usize,
    /// Nodes still holding fewer than `w` messages (late injection only).
    below_threshold: usize,
    metrics: MetricsSeries,
}

impl World {
    pub fn new(config: &SimConfig) -> Result<World, EngineError> {
        let config = validate(config)?;
        let (n, k) = (config.n, config.k);
        let kernel = MoveKernel::new(config.grid_side(), config.mobility);
        let mut placement = derive_stream(config.seed, "engine.placement");
        let nodes = place_uniform(n, k, &kernel, &mut placement);
        let neighbors = (config.mobility == Mobility::Static).then(|| {
            let positions: Vec<Point> = nodes.iter().map(|nd| nd.pos).collect();
            NeighborCache::new(&positions, NeighborCache::DEFAULT_DEPTH)
        });
        let probe = match config.injection {
            InjectionSchedule::LateStar { .. } => k - 1,
            InjectionSchedule::Simultaneous => 0,
        };
        let metrics = MetricsSeries {
            n,
            k,
            probe,
            sample_slots: Vec::new(),
            holders: Vec::new(),
            wasted: Vec::new(),
            probe_cells: Vec::new(),
            strip_profiles: Vec::new(),
            throughput: Vec::new(),
            injected_at: vec![None; k],
            completion: vec![None; k],
            wasted_total: vec![0; k],
            slots_run: 0,
            incomplete: false,
        };
        let seed = config.seed;
        let mut world = World {
            params: PhyParams::from_config(&config),
            kernel,
            neighbors,
            nodes,
            slot: 0,
            streams: Streams {
                mobility: derive_stream(seed, "engine.mobility"),
                roles: derive_stream(seed, "engine.roles"),
                select: derive_stream(seed, "engine.select"),
                phy: derive_stream(seed, "engine.phy"),
            },
            holders: vec![0; k],
            wasted: vec![0; k],
            complete: 0,
            below_threshold: n,
            metrics,
            config,
        };
        let initial = match world.config.injection {
            InjectionSchedule::Simultaneous => k,
            InjectionSchedule::LateStar { .. } => k - 1,
        };
        for i in 0..initial {
            world.inject(MessageId(i as u32));
        }
        world.recount_threshold();
        world.try_late_injection();
        world.sample();
        Ok(world)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn kernel(&self) -> &MoveKernel {
        &self.kernel
    }

    pub fn metrics(&self) -> &MetricsSeries {
        &self.metrics
    }

    /// Current `N_i` for every message.
    pub fn holders(&self) -> &[u32] {
        &self.holders
    }

    pub fn wasted(&self) -> &[u64] {
        &self.wasted
    }

    fn inject(&mut self, msg: MessageId) {
        let i = msg.index();
        self.nodes[msg.source()].make_source(msg);
        self.holders[i] = 1;
        self.metrics.injected_at[i] = Some(self.slot);
        self.check_complete(i);
        if let InjectionSchedule::LateStar { w } = self.config.injection {
            if self.nodes[msg.source()].len() == w {
                self.below_threshold -= 1;
            }
        }
    }

    fn recount_threshold(&mut self) {
        if let InjectionSchedule::LateStar { w } = self.config.injection {
            self.below_threshold = self.nodes.iter().filter(|n| n.len() < w).count();
        }
    }

    fn try_late_injection(&mut self) -> Option<MessageId> {
        let InjectionSchedule::LateStar { .. } = self.config.injection else {
            return None;
        };
        let late = self.config.k - 1;
        if self.metrics.injected_at[late].is_none() && self.below_threshold == 0 {
            let msg = MessageId(late as u32);
            self.inject(msg);
            return Some(msg);
        }
        None
    }

    fn check_complete(&mut self, i: usize) {
        if self.holders[i] as usize == self.config.n && self.metrics.completion[i].is_none() {
            let start = self.metrics.injected_at[i].expect("completed before injection");
            self.metrics.completion[i] = Some(self.slot - start);
            self.complete += 1;
        }
    }

    /// Whether the configured stop condition holds now.
    pub fn stop_satisfied(&self) -> bool {
        match self.config.stop {
            StopCondition::AllComplete => self.complete == self.config.k,
            StopCondition::MessageComplete(i) => self.metrics.completion[i].is_some(),
            StopCondition::SlotBudget => self.slot >= self.config.max_slots,
        }
    }

    fn probe_origin(&self) -> Point {
        self.nodes[MessageId(self.metrics.probe as u32).source()].pos
    }

    /// Folded strip counts of the probe message now.
    pub fn strip_profile(&self) -> Result<Vec<u32>, EngineError> {
        if self.config.mobility != Mobility::Static {
            return Err(EngineError::NotStatic);
        }
        Ok(folded_strip_counts(
            &self.nodes,
            MessageId(self.metrics.probe as u32),
            self.probe_origin(),
            self.config.n,
        ))
    }

    fn sample(&mut self) {
        if self.metrics.sample_slots.last() == Some(&self.slot) {
            return;
        }
        let probe = MessageId(self.metrics.probe as u32);
        let mut cells = vec![0u32; self.kernel.cells()];
        for node in self.nodes.iter().filter(|nd| nd.has(probe)) {
            cells[node.cell.index(self.kernel.side)] += 1;
        }
        self.metrics.sample_slots.push(self.slot);
        self.metrics.holders.push(self.holders.clone());
        self.metrics.wasted.push(self.wasted.clone());
        self.metrics.probe_cells.push(cells);
        if let Ok(profile) = self.strip_profile() {
            self.metrics.strip_profiles.push(profile);
        }
    }

    /// Runs one slot: (1) move, (2) designate, (3) pair, (4) select,
    /// (5) resolve, (6) deliver, (7) record.
    pub fn run_slot(&mut self) -> SlotOutcome {
        self.slot += 1;
        let slot = self.slot;
        let n = self.config.n;

        step_all(&mut self.nodes, &self.kernel, &mut self.streams.mobility);

        let roles = designate(n, self.config.theta, &mut self.streams.roles);
        let positions: Vec<Point> = self.nodes.iter().map(|nd| nd.pos).collect();
        let pairings = match &self.neighbors {
            Some(cache) => cache.pair(&roles, &positions),
            None => pair_nearest(&roles, &positions),
        };

        let parity = Parity::of_slot(slot);
        let carried: Vec<Option<MessageId>> = pairings
            .iter()
            .map(|p| {
                select(
                    self.config.protocol,
                    &self.nodes[p.sender],
                    parity,
                    &mut self.streams.select,
                )
            })
            .collect();

        let active: Vec<usize> = (0..pairings.len())
            .filter(|&i| carried[i].is_some())
            .collect();
        let active_pairings: Vec<Pairing> = active.iter().map(|&i| pairings[i]).collect();
        let active_ok = match self.params.mode {
            PhyMode::Sinr => resolve_sinr(&active_pairings, &positions, &self.params),
            PhyMode::Bernoulli => {
                resolve_bernoulli(&active_pairings, &self.params, &mut self.streams.phy)
            }
        };
        let mut success = vec![false; pairings.len()];
        for (&idx, ok) in active.iter().zip(active_ok) {
            success[idx] = ok;
        }

        let mut deliveries = Vec::new();
        let (mut fresh, mut waste) = (0u32, 0u32);
        let threshold = match self.config.injection {
            InjectionSchedule::LateStar { w } => Some(w),
            InjectionSchedule::Simultaneous => None,
        };
        for (idx, p) in pairings.iter().enumerate() {
            if !success[idx] {
                continue;
            }
            let msg = carried[idx].expect("only carrying pairings succeed");
            let was_new = deliver(&mut self.nodes[p.receiver], msg);
            let i = msg.index();
            if was_new {
                fresh += 1;
                self.holders[i] += 1;
                if threshold == Some(self.nodes[p.receiver].len()) {
                    self.below_threshold -= 1;
                }
                self.check_complete(i);
            } else {
                waste += 1;
                self.wasted[i] += 1;
                self.metrics.wasted_total[i] += 1;
            }
            deliveries.push(Delivery {
                sender: p.sender,
                receiver: p.receiver,
                msg,
                was_new,
            });
        }

        let injected: Vec<MessageId> = self.try_late_injection().into_iter().collect();
        self.metrics.throughput.push(fresh + waste);
        self.metrics.slots_run = slot;
        let probe_injected = self.metrics.injected_at[self.metrics.probe];
        let fresh_probe = probe_injected.is_some_and(|at| slot - at <= POST_INJECTION_WINDOW);
        if fresh_probe || slot.is_multiple_of(self.config.stride()) {
            self.sample();
        }

        SlotOutcome {
            slot,
            pairings,
            carried,
            success,
            deliveries,
            new_deliveries: fresh,
            wasted_deliveries: waste,
            injected,
        }
    }

    /// Loops until the stop condition or the slot budget, whichever first.
    pub fn run_to_end(&mut self) {
        while !self.stop_satisfied() && self.slot < self.config.max_slots {
            self.run_slot();
        }
        self.metrics.incomplete = !self.stop_satisfied();
        self.sample();
    }

    pub fn into_metrics(self) -> MetricsSeries {
        self.metrics
    }
}

/// Validates `config`, runs it to completion and returns the metrics.
pub fn run(config: &SimConfig) -> Result<MetricsSeries, EngineError> {
    let mut world = World::new(config)?;
    world.run_to_end();
    Ok(world.into_metrics())
}
