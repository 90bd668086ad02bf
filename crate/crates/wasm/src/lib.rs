//! Browser bindings for the demo page in `www/`.
//!
//! Three operations are exposed: a steppable [`Demo`] world for the live
//! network view, [`spread_curve`] for comparing how fast gossip completes,
//! and [`mixing_curve`] for the exact distance-to-uniform of the mobility
//! walk. Each wrapper is a thin shim over a plain Rust function so the
//! logic is testable natively.

use mobgossip::analysis::exact_tv_curve;
use mobgossip::mobility::MoveKernel;
use mobgossip::model::Cell;
use mobgossip::{InjectionSchedule, Mobility, PhyMode, Protocol, SimConfig, SlotOutcome, World};
use wasm_bindgen::prelude::*;

/// Parameters shared by the live view and the spread curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub n: usize,
    pub k: usize,
    pub v: f64,
    pub protocol: String,
    pub phy: String,
    pub mobility: String,
    /// Late-injection threshold; 0 injects everything at once.
    pub late_w: usize,
    pub seed: u64,
}

impl Params {
    pub fn config(&self) -> Result<SimConfig, String> {
        let mut c = SimConfig::new(self.n, self.k, self.v);
        c.protocol = self
            .protocol
            .parse::<Protocol>()
            .map_err(|e| e.to_string())?;
        c.phy_mode = self.phy.parse::<PhyMode>().map_err(|e| e.to_string())?;
        c.mobility = self
            .mobility
            .parse::<Mobility>()
            .map_err(|e| e.to_string())?;
        if self.late_w > 0 {
            c.injection = InjectionSchedule::LateStar { w: self.late_w };
        }
        c.seed = self.seed;
        c.max_slots = u64::MAX / 2;
        mobgossip::validate(&c).map_err(|e| e.to_string())
    }
}

/// Fraction of all `(node, message)` pairs delivered after each slot, slot
/// 0 first, until everything has spread or `max_slots` is reached.
pub fn spread_fractions(params: &Params, max_slots: u64) -> Result<Vec<f64>, String> {
    let cfg = params.config()?;
    let mut world = World::new(&cfg).map_err(|e| e.to_string())?;
    let total = (cfg.n * cfg.k) as f64;
    let fraction = |w: &World| w.holders().iter().map(|&h| h as f64).sum::<f64>() / total;
    let mut out = vec![fraction(&world)];
    while !world.stop_satisfied() && world.slot() < max_slots {
        world.run_slot();
        out.push(fraction(&world));
    }
    Ok(out)
}

/// Exact TV distance to uniform from the corner cell for `0..=t_max` steps.
pub fn tv_curve(side: usize, boundary: &str, t_max: u64) -> Result<Vec<f64>, String> {
    if !(1..=64).contains(&side) {
        return Err(format!("grid side {side} outside 1..=64"));
    }
    let boundary = boundary.parse::<Mobility>().map_err(|e| e.to_string())?;
    Ok(exact_tv_curve(
        &MoveKernel::new(side, boundary),
        Cell::new(0, 0),
        t_max,
    ))
}

#[allow(clippy::too_many_arguments)]
fn params(
    n: usize,
    k: usize,
    v: f64,
    protocol: String,
    phy: String,
    mobility: String,
    late_w: usize,
    seed: u64,
) -> Params {
    Params {
        n,
        k,
        v,
        protocol,
        phy,
        mobility,
        late_w,
        seed,
    }
}

/// A live world stepped from JavaScript.
#[wasm_bindgen]
pub struct Demo {
    world: World,
    k: usize,
    last: Option<SlotOutcome>,
}

impl Demo {
    pub fn create(p: &Params) -> Result<Demo, String> {
        let cfg = p.config()?;
        Ok(Demo {
            world: World::new(&cfg).map_err(|e| e.to_string())?,
            k: cfg.k,
            last: None,
        })
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        k: usize,
        v: f64,
        protocol: String,
        phy: String,
        mobility: String,
        late_w: usize,
        seed: u64,
    ) -> Result<Demo, JsError> {
        Demo::create(&params(n, k, v, protocol, phy, mobility, late_w, seed))
            .map_err(|e| JsError::new(&e))
    }

    /// Advances `count` slots, keeping the last slot's outcome.
    pub fn step(&mut self, count: u32) {
        for _ in 0..count {
            if self.world.stop_satisfied() {
                break;
            }
            self.last = Some(self.world.run_slot());
        }
    }

    pub fn slot(&self) -> u64 {
        self.world.slot()
    }

    pub fn done(&self) -> bool {
        self.world.stop_satisfied()
    }

    pub fn grid_side(&self) -> usize {
        self.world.config().grid_side()
    }

    /// Interleaved `x, y` per node.
    pub fn positions(&self) -> Vec<f64> {
        self.world
            .nodes()
            .iter()
            .flat_map(|n| [n.pos.x, n.pos.y])
            .collect()
    }

    /// Fraction of the `k` messages each node holds.
    pub fn knowledge(&self) -> Vec<f64> {
        self.world
            .nodes()
            .iter()
            .map(|n| n.len() as f64 / self.k as f64)
            .collect()
    }

    /// Holders per message.
    pub fn holders(&self) -> Vec<u32> {
        self.world.holders().to_vec()
    }

    /// Successful transfers of the last slot as `sender, receiver, new`
    /// triples (`new` is 1 for a fresh message, 0 for a wasted one).
    pub fn transfers(&self) -> Vec<u32> {
        self.last
            .iter()
            .flat_map(|o| o.deliveries.iter())
            .flat_map(|d| [d.sender as u32, d.receiver as u32, d.was_new as u32])
            .collect()
    }
}

/// Spread fraction per slot; see [`spread_fractions`].
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn spread_curve(
    n: usize,
    k: usize,
    v: f64,
    protocol: String,
    phy: String,
    mobility: String,
    late_w: usize,
    seed: u64,
    max_slots: u64,
) -> Result<Vec<f64>, JsError> {
    spread_fractions(
        &params(n, k, v, protocol, phy, mobility, late_w, seed),
        max_slots,
    )
    .map_err(|e| JsError::new(&e))
}

/// Exact TV-to-uniform curve; see [`tv_curve`].
#[wasm_bindgen]
pub fn mixing_curve(side: usize, boundary: String, t_max: u64) -> Result<Vec<f64>, JsError> {
    tv_curve(side, &boundary, t_max).map_err(|e| JsError::new(&e))
}
