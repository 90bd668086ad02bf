use std::io::Write;
use std::time::Duration;

use mobgossip::{MetricsSeries, SimConfig};
use serde::{Deserialize, Serialize};

/// Bumped whenever a column is added, removed, renamed or reordered.
pub const SCHEMA_VERSION: u32 = 1;

/// One CSV row per `(point, replicate)`: the validated config flattened,
/// then completion and waste statistics. `wall_ms` is last so determinism
/// checks can drop it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema: u32,
    pub point: usize,
    pub replicate: usize,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub v: f64,
    pub theta: f64,
    pub phy_mode: String,
    #[serde(rename = "P")]
    pub power: Option<f64>,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c_success: f64,
    pub protocol: String,
    pub mobility: String,
    pub injection: String,
    pub stop: String,
    pub max_slots: u64,
    pub slots_run: u64,
    pub completed: usize,
    pub median_t: Option<u64>,
    pub max_t: Option<u64>,
    /// Spreading time of the late message; empty without late injection.
    pub late_t: Option<u64>,
    pub late_injected_at: Option<u64>,
    pub wasted_total: u64,
    pub incomplete: bool,
    pub wall_ms: u64,
}

impl ResultRow {
    /// `config` should be the validated config the run used.
    pub fn new(
        point: usize,
        replicate: usize,
        config: &SimConfig,
        m: &MetricsSeries,
        wall: Duration,
    ) -> Self {
        let late = match config.injection {
            mobgossip::InjectionSchedule::LateStar { .. } => Some(config.k - 1),
            mobgossip::InjectionSchedule::Simultaneous => None,
        };
        ResultRow {
            schema: SCHEMA_VERSION,
            point,
            replicate,
            seed: config.seed,
            n: config.n,
            k: config.k,
            v: config.v,
            theta: config.theta,
            phy_mode: config.phy_mode.to_string(),
            power: config.power,
            eta: config.eta,
            alpha: config.alpha,
            beta: config.beta,
            c_success: config.c_success,
            protocol: config.protocol.to_string(),
            mobility: config.mobility.to_string(),
            injection: config.injection.to_string(),
            stop: config.stop.to_string(),
            max_slots: config.max_slots,
            slots_run: m.slots_run,
            completed: m.completion.iter().flatten().count(),
            median_t: m.median_completion(),
            max_t: m.max_completion(),
            late_t: late.and_then(|i| m.completion[i]),
            late_injected_at: late.and_then(|i| m.injected_at[i]),
            wasted_total: m.wasted_total.iter().sum(),
            incomplete: m.incomplete,
            wall_ms: wall.as_millis() as u64,
        }
    }
}

/// Writes `rows` as RFC-4180 CSV. The header is written even for no rows.
pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(header())?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Column names of the current schema.
pub fn header() -> Vec<&'static str> {
    vec![
        "schema",
        "point",
        "replicate",
        "seed",
        "n",
        "k",
        "v",
        "theta",
        "phy_mode",
        "P",
        "eta",
        "alpha",
        "beta",
        "c_success",
        "protocol",
        "mobility",
        "injection",
        "stop",
        "max_slots",
        "slots_run",
        "completed",
        "median_t",
        "max_t",
        "late_t",
        "late_injected_at",
        "wasted_total",
        "incomplete",
        "wall_ms",
    ]
}

/// Per-sample time series of a run: one line per `(sample, message)`.
pub fn write_series<W: Write>(out: W, m: &MetricsSeries) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["slot", "message", "holders", "wasted"])?;
    for (s, slot) in m.sample_slots.iter().enumerate() {
        for (i, (h, f)) in m.holders[s].iter().zip(&m.wasted[s]).enumerate() {
            w.write_record([
                slot.to_string(),
                i.to_string(),
                h.to_string(),
                f.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
