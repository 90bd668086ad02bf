use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use mobgossip::{validate, Mobility, PhyMode, Protocol, SimConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::row::ResultRow;

/// Lists swept over; an absent axis keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub v: Vec<f64>,
    #[serde(default)]
    pub protocol: Vec<Protocol>,
    #[serde(default)]
    pub phy_mode: Vec<PhyMode>,
    #[serde(default)]
    pub mobility: Vec<Mobility>,
}

/// A sweep: the cross product of `axes` applied to `base`, each point run
/// `replicates` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub base: SimConfig,
    #[serde(default)]
    pub axes: SweepAxes,
    #[serde(default = "one")]
    pub replicates: usize,
    /// Root seed for the per-replicate fan-out; falls back to `base.seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Directory receiving `results.csv`.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn one() -> usize {
    1
}

fn axis<T: Clone>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

impl ExperimentSpec {
    /// Every point of the cross product, validated. Order: n, k, v,
    /// protocol, phy_mode, mobility, last axis fastest.
    pub fn points(&self) -> Result<Vec<SimConfig>> {
        if self.replicates == 0 {
            bail!("replicates must be at least 1");
        }
        let b = &self.base;
        let mut out = Vec::new();
        for &n in &axis(&self.axes.n, b.n) {
            for &k in &axis(&self.axes.k, b.k) {
                for &v in &axis(&self.axes.v, b.v) {
                    for &protocol in &axis(&self.axes.protocol, b.protocol) {
                        for &phy_mode in &axis(&self.axes.phy_mode, b.phy_mode) {
                            for &mobility in &axis(&self.axes.mobility, b.mobility) {
                                let cfg = SimConfig {
                                    n,
                                    k,
                                    v,
                                    protocol,
                                    phy_mode,
                                    mobility,
                                    ..b.clone()
                                };
                                let idx = out.len();
                                let cfg =
                                    validate(&cfg).with_context(|| format!("sweep point {idx}"))?;
                                out.push(cfg);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn root_seed(&self) -> u64 {
        self.seed.unwrap_or(self.base.seed)
    }
}

/// Runs every point and replicate, then returns rows sorted by
/// `(point, replicate)`. Validation of all points happens before any run.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let points = spec.points()?;
    let root = spec.root_seed();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..spec.replicates).map(move |r| (p, r)))
        .collect();
    log::info!(
        "sweep: {} points x {} replicates",
        points.len(),
        spec.replicates
    );
    let mut rows: Vec<ResultRow> = jobs
        .par_iter()
        .map(|&(p, r)| {
            let cfg = points[p]
                .clone()
                .with_seed(crate::replicate_seed(root, p, r));
            let start = Instant::now();
            let m = mobgossip::run(&cfg).map_err(anyhow::Error::from)?;
            Ok(ResultRow::new(p, r, &cfg, &m, start.elapsed()))
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|row| (row.point, row.replicate));
    Ok(rows)
}
