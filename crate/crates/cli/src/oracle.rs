//! `mobgossip oracle <name>`: thin CSV front-ends over the analysis and PHY
//! routines. Each oracle documents its columns on its subcommand.

use std::io::Write;

use anyhow::{bail, Result};
use clap::{Args, Subcommand};
use mobgossip::analysis::{
    concentration_check, conductance_exact, exact_mixing, hitting_horizon, hitting_time_mc,
    mixing_time_powering, return_count_mc, rgg_radius, RggGraph, DEFAULT_C_H,
};
use mobgossip::engine::folded_strip_population;
use mobgossip::mobility::MoveKernel;
use mobgossip::model::Point;
use mobgossip::phy::estimate_success_constant;
use mobgossip::{
    derive_stream, validate, InjectionSchedule, Mobility, PhyMode, Protocol, SimConfig, World,
};
use rand::Rng;

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Root seed for Monte Carlo oracles.
    #[arg(long, env = "MOBGOSSIP_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Oracle {
    /// Exact t_mix(1/4) and t_mix(eps) by forward iteration and by matrix
    /// powering. Columns: side, boundary, n, t_quarter, t_quarter_powering,
    /// eps, t_eps, t_eps_powering.
    Mixing {
        #[arg(long)]
        s: usize,
        #[arg(long, default_value = "edge_stay")]
        boundary: Mobility,
        /// Node count setting eps = max(n^-10, 1e-12).
        #[arg(long, default_value_t = 1024)]
        n: usize,
    },
    /// Probability that the relative walk reaches the boundary within the
    /// horizon. Columns: s, n, c_h, horizon, trials, hits, probability,
    /// std_err.
    Hitting {
        #[arg(long, default_value_t = 32)]
        s: usize,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_C_H)]
        c_h: f64,
        /// Overrides the horizon floor(m / (c_h ln n)).
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Mean number of returns of the relative walk to the origin within the
    /// horizon. Columns: horizon, trials, mean, std_err.
    Returns {
        #[arg(long)]
        horizon: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Balls into uniform bins against the [b/6m, 7b/3m] envelope. Columns:
    /// balls, bins, n, trials, lower, upper, min_observed, max_observed,
    /// violations, size_condition_met.
    Concentration {
        #[arg(long, default_value_t = 64)]
        bins: usize,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        /// Defaults to round(40 m ln n).
        #[arg(long)]
        balls: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Brute-force conductance of a small graph. `--graph` is `cycle<N>`,
    /// `complete<N>` or `rgg<N>` (radius sqrt(32 ln N / N)). Columns:
    /// graph, n, seed, radius, phi, connected.
    Conductance {
        #[arg(long)]
        graph: String,
        /// Number of random instances for `rgg` graphs.
        #[arg(long, default_value_t = 1)]
        instances: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical per-pair SINR success under the calibrated power rule.
    /// Columns: n, theta, slots, pairings, above_threshold, delivered, rate,
    /// delivered_rate.
    PhyConstant {
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        theta: f64,
        /// Minimum number of pairings to observe.
        #[arg(long, default_value_t = 10_000)]
        pairings: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Folded strip profile of a late message on a static network, for each
    /// slot from its injection through the window. Columns: slot, offset,
    /// strip, holders, population.
    StripProfile {
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        k: usize,
        #[arg(long, default_value_t = 32)]
        w: usize,
        #[arg(long, default_value = "random_push")]
        protocol: Protocol,
        #[arg(long, default_value_t = 64)]
        window: u64,
        #[arg(long, default_value_t = 5_000_000)]
        max_slots: u64,
        #[command(flatten)]
        common: Common,
    },
}

/// Header plus rows, written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn graph(spec: &str, seed: u64, instance: u64) -> Result<(RggGraph, f64)> {
    let split = spec
        .find(|c: char| c.is_ascii_digit())
        .unwrap_or(spec.len());
    let (kind, size) = spec.split_at(split);
    let n: usize = size
        .parse()
        .map_err(|_| anyhow::anyhow!("graph `{spec}`: expected cycle<N>, complete<N> or rgg<N>"))?;
    Ok(match kind {
        "cycle" => (RggGraph::cycle(n), f64::NAN),
        "complete" => (RggGraph::complete(n), f64::NAN),
        "rgg" => {
            let mut rng = derive_stream(seed, &format!("oracle.rgg.{n}.{instance}"));
            let pts: Vec<Point> = (0..n)
                .map(|_| Point {
                    x: rng.gen(),
                    y: rng.gen(),
                })
                .collect();
            let r = rgg_radius(n);
            (RggGraph::geometric(pts, r), r)
        }
        _ => bail!("graph `{spec}`: expected cycle<N>, complete<N> or rgg<N>"),
    })
}

pub fn run(oracle: &Oracle) -> Result<Table> {
    match oracle {
        Oracle::Mixing { s, boundary, n } => {
            let report = exact_mixing(*s, *boundary, *n)?;
            let kernel = MoveKernel::new(*s, *boundary);
            let t_max = 400 * (s * s) as u64 + 1000;
            let mut t = Table::new(vec![
                "side",
                "boundary",
                "n",
                "t_quarter",
                "t_quarter_powering",
                "eps",
                "t_eps",
                "t_eps_powering",
            ]);
            t.push(vec![
                s.to_string(),
                boundary.to_string(),
                n.to_string(),
                opt(report.t_quarter),
                opt(mixing_time_powering(&kernel, 0.25, t_max)),
                format!("{:e}", report.eps),
                opt(report.t_eps),
                opt(mixing_time_powering(&kernel, report.eps, t_max)),
            ]);
            Ok(t)
        }
        Oracle::Hitting {
            s,
            n,
            c_h,
            horizon,
            trials,
            common,
        } => {
            let h = horizon.unwrap_or_else(|| hitting_horizon(*s, *n, *c_h));
            let e = hitting_time_mc(
                *s,
                h,
                *trials,
                &derive_stream(common.seed, "oracle.hitting"),
            );
            let mut t = Table::new(vec![
                "s",
                "n",
                "c_h",
                "horizon",
                "trials",
                "hits",
                "probability",
                "std_err",
            ]);
            t.push(vec![
                s.to_string(),
                n.to_string(),
                c_h.to_string(),
                h.to_string(),
                e.trials.to_string(),
                e.hits.to_string(),
                e.probability().to_string(),
                e.std_err().to_string(),
            ]);
            Ok(t)
        }
        Oracle::Returns {
            horizon,
            trials,
            common,
        } => {
            let e = return_count_mc(
                *horizon,
                *trials,
                &derive_stream(common.seed, "oracle.returns"),
            );
            let mut t = Table::new(vec!["horizon", "trials", "mean", "std_err"]);
            t.push(vec![
                e.horizon.to_string(),
                e.trials.to_string(),
                e.mean.to_string(),
                e.std_err.to_string(),
            ]);
            Ok(t)
        }
        Oracle::Concentration {
            bins,
            n,
            balls,
            trials,
            common,
        } => {
            let b =
                balls.unwrap_or_else(|| (40.0 * *bins as f64 * (*n as f64).ln()).round() as u64);
            let r = concentration_check(
                b,
                *bins,
                None,
                *n,
                *trials,
                &derive_stream(common.seed, "oracle.concentration"),
            )?;
            let mut t = Table::new(vec![
                "balls",
                "bins",
                "n",
                "trials",
                "lower",
                "upper",
                "min_observed",
                "max_observed",
                "violations",
                "size_condition_met",
            ]);
            t.push(vec![
                r.balls.to_string(),
                r.bins.to_string(),
                n.to_string(),
                r.trials.to_string(),
                r.lower.to_string(),
                r.upper.to_string(),
                r.min_observed.to_string(),
                r.max_observed.to_string(),
                r.violations.to_string(),
                r.size_condition_met.to_string(),
            ]);
            Ok(t)
        }
        Oracle::Conductance {
            graph: spec,
            instances,
            common,
        } => {
            let mut t = Table::new(vec!["graph", "n", "seed", "radius", "phi", "connected"]);
            let count = if spec.starts_with("rgg") {
                (*instances).max(1)
            } else {
                1
            };
            for i in 0..count {
                let (g, r) = graph(spec, common.seed, i)?;
                let c = conductance_exact(&g)?;
                t.push(vec![
                    spec.clone(),
                    g.len().to_string(),
                    common.seed.to_string(),
                    if r.is_nan() {
                        String::new()
                    } else {
                        r.to_string()
                    },
                    c.phi.to_string(),
                    c.connected.to_string(),
                ]);
            }
            Ok(t)
        }
        Oracle::PhyConstant {
            n,
            theta,
            pairings,
            common,
        } => {
            let mut c = SimConfig::new(*n, 1, 1.0 / 8.0);
            c.phy_mode = PhyMode::Sinr;
            c.theta = *theta;
            let c = validate(&c)?;
            let slots = (*pairings as f64 / (c.theta * *n as f64)).ceil() as u64 + 5;
            let e =
                estimate_success_constant(&c, slots, &mut derive_stream(common.seed, "oracle.phy"));
            let mut t = Table::new(vec![
                "n",
                "theta",
                "slots",
                "pairings",
                "above_threshold",
                "delivered",
                "rate",
                "delivered_rate",
            ]);
            t.push(vec![
                n.to_string(),
                theta.to_string(),
                slots.to_string(),
                e.pairings.to_string(),
                e.above_threshold.to_string(),
                e.delivered.to_string(),
                e.rate().to_string(),
                e.delivered_rate().to_string(),
            ]);
            Ok(t)
        }
        Oracle::StripProfile {
            n,
            k,
            w,
            protocol,
            window,
            max_slots,
            common,
        } => {
            let mut c = SimConfig::new(*n, *k, 1.0 / 3.0);
            c.mobility = Mobility::Static;
            c.protocol = *protocol;
            c.injection = InjectionSchedule::LateStar { w: *w };
            c.max_slots = *max_slots;
            c.seed = common.seed;
            let mut world = World::new(&c)?;
            let late = k - 1;
            while world.metrics().injected_at[late].is_none() {
                if world.slot() >= *max_slots {
                    bail!("late message not injected within {max_slots} slots");
                }
                world.run_slot();
            }
            let at = world.metrics().injected_at[late].expect("checked above");
            let origin = world.nodes()[late].pos;
            let population = folded_strip_population(world.nodes(), origin, *n);
            let mut t = Table::new(vec!["slot", "offset", "strip", "holders", "population"]);
            loop {
                let profile = world.strip_profile()?;
                for (strip, (h, p)) in profile.iter().zip(&population).enumerate() {
                    t.push(vec![
                        world.slot().to_string(),
                        (world.slot() - at).to_string(),
                        (strip + 1).to_string(),
                        h.to_string(),
                        p.to_string(),
                    ]);
                }
                if world.slot() - at >= *window || world.slot() >= *max_slots {
                    break;
                }
                world.run_slot();
            }
            Ok(t)
        }
    }
}
