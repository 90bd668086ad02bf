//! Desk-scale acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

use std::time::Instant;

use mobgossip::analysis::{
    concentration_check, conductance_exact, exact_mixing, hitting_horizon, hitting_time_mc,
    mixing_time_iterate, mixing_time_powering, return_count_mc, rgg_conductance_scaling,
    rgg_radius, RggGraph, DEFAULT_C_H,
};
use mobgossip::mobility::{empirical_tv_to_uniform, MoveKernel};
use mobgossip::phy::estimate_success_constant;
use mobgossip::{
    derive_stream, run, validate, InjectionSchedule, MetricsSeries, Mobility, PhyMode, Protocol,
    SimConfig, StopCondition, World,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn median_u64(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    xs[(xs.len() - 1) / 2]
}

fn median_f64(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[(xs.len() - 1) / 2]
}

fn band(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    hi / lo
}

fn single_message(n: usize, v: f64, seed: u64) -> u64 {
    let mut c = SimConfig::new(n, 1, v);
    c.protocol = Protocol::RandomPush;
    c.phy_mode = PhyMode::Bernoulli;
    c.c_success = 0.5;
    c.theta = 0.3;
    c.seed = seed;
    run(&c).unwrap().completion[0].expect("single message completes")
}

fn full_mobility_shape() -> Outcome {
    let start = Instant::now();
    let mut ratios = Vec::new();
    for n in [256usize, 512, 1024, 2048] {
        let t = median_u64(
            (0..20)
                .map(|r| single_message(n, 1.0 / 3.0, 100 + r))
                .collect(),
        );
        ratios.push(t as f64 / (n as f64).ln());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: band(&ratios) <= 2.0 && secs <= 60.0,
        detail: format!(
            "T/ln n = {ratios:.2?}, band {:.3}, {secs:.1}s",
            band(&ratios)
        ),
    }
}

fn velocity_speedup() -> Outcome {
    let medians: Vec<u64> = [1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0]
        .iter()
        .map(|&v| median_u64((0..20).map(|r| single_message(1024, v, 200 + r)).collect()))
        .collect();
    let monotone = medians.windows(2).all(|w| w[1] as f64 <= 1.1 * w[0] as f64);
    Outcome {
        pass: monotone,
        detail: format!("median T at v = 1/32, 1/16, 1/8: {medians:?}"),
    }
}

fn mobile_config(n: usize, k: usize, seed: u64) -> SimConfig {
    let mut c = SimConfig::new(n, k, 1.0 / 3.0);
    c.protocol = Protocol::MobilePush;
    c.phy_mode = PhyMode::Bernoulli;
    c.max_slots = 2_000_000;
    c.seed = seed;
    c
}

fn mobile_near_optimal() -> Outcome {
    let start = Instant::now();
    let mut ratios = Vec::new();
    let mut precondition = Vec::new();
    for n in [128usize, 256, 512] {
        let c = mobile_config(n, n, 0);
        let v = validate(&c).unwrap().v;
        precondition.push(v * v >= 8.0 * (n as f64).ln() / n as f64);
        let t = median_u64(
            (0..10)
                .map(|r| {
                    run(&mobile_config(n, n, 300 + r))
                        .unwrap()
                        .max_completion()
                        .expect("complete")
                })
                .collect(),
        );
        let l = (n as f64).ln();
        ratios.push(t as f64 / (n as f64 * l * l));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: band(&ratios) <= 2.0 && secs <= 300.0,
        detail: format!(
            "max T/(k ln^2 n) = {ratios:.3?}, band {:.3}, {secs:.1}s, v^2 >= 8 ln n/k per n: {precondition:?} (v capped at 1/3)",
            band(&ratios)
        ),
    }
}

const LATE_W: usize = 32;
/// Static spreading is heavy-tailed (single seeds can need millions of
/// slots), so the late runs are budgeted and censored.
const LATE_BUDGET: u64 = 600_000;

fn static_late(seed: u64) -> MetricsSeries {
    let mut c = SimConfig::new(1024, 64, 1.0 / 3.0);
    c.protocol = Protocol::RandomPush;
    c.phy_mode = PhyMode::Bernoulli;
    c.mobility = Mobility::Static;
    c.injection = InjectionSchedule::LateStar { w: LATE_W };
    c.stop = StopCondition::MessageComplete(63);
    c.max_slots = LATE_BUDGET;
    c.seed = seed;
    run(&c).unwrap()
}

/// Lower bound on the late message's spreading time: exact when it
/// completed, `budget - injection` when censored by the slot budget, and 0
/// (the least favourable value) when it was never injected.
fn late_lower_bound(m: &MetricsSeries) -> (u64, &'static str) {
    match (m.injected_at[63], m.completion[63]) {
        (_, Some(t)) => (t, "complete"),
        (Some(at), None) => (m.slots_run - at, "censored"),
        (None, None) => (0, "not injected"),
    }
}

fn late_slowdown(static_runs: &[MetricsSeries]) -> Outcome {
    let bounds: Vec<(u64, &str)> = static_runs.iter().map(late_lower_bound).collect();
    let censored = bounds.iter().filter(|b| b.1 != "complete").count();
    let t_star = median_u64(bounds.iter().map(|b| b.0).collect());
    let mobile = median_u64(
        (0..10)
            .map(|r| {
                run(&mobile_config(1024, 64, 400 + r))
                    .unwrap()
                    .median_completion()
                    .expect("complete")
            })
            .collect(),
    );
    Outcome {
        pass: t_star as f64 >= 2.0 * mobile as f64,
        detail: format!(
            "static median T* >= {t_star} ({censored}/10 censored at {LATE_BUDGET} slots), mobile median per-message T = {mobile}"
        ),
    }
}

/// `N_{V_{s+1}} / N_{V_s}` on a folded strip profile, strips numbered from
/// 1 at the source. Strips past the edge hold nobody; 0/0 counts as 0.
fn strip_ratio(profile: &[u32], s: usize) -> f64 {
    let at = |i: usize| profile.get(i - 1).copied().unwrap_or(0) as f64;
    let (num, den) = (at(s + 1), at(s));
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn strip_decay(static_runs: &[MetricsSeries]) -> Outcome {
    let offset = (LATE_W as f64).sqrt().round() as u64;
    let profiles: Vec<Vec<u32>> = static_runs
        .iter()
        .filter_map(|m| {
            let at = m.injected_at[63]? + offset;
            Some(m.strip_profiles[m.nearest_sample(at)?].clone())
        })
        .collect();
    if profiles.is_empty() {
        return Outcome {
            pass: false,
            detail: "no replicate injected the late message".into(),
        };
    }
    let medians: Vec<f64> = (1..=3)
        .map(|s| median_f64(profiles.iter().map(|p| strip_ratio(p, s)).collect()))
        .collect();
    Outcome {
        pass: medians.iter().all(|&r| r <= 0.7),
        detail: format!("median ratios s=1..3: {medians:.3?}, profiles {profiles:?}"),
    }
}

fn concentration() -> Outcome {
    let (m, n) = (64usize, 4096usize);
    let balls = (40.0 * m as f64 * (n as f64).ln()).round() as u64;
    let r = concentration_check(
        balls,
        m,
        None,
        n,
        1000,
        &derive_stream(6, "acceptance.concentration"),
    )
    .unwrap();
    Outcome {
        pass: r.violations == 0,
        detail: format!(
            "b = {balls}, loads in [{}, {}] vs envelope [{:.1}, {:.1}], {} violations",
            r.min_observed, r.max_observed, r.lower, r.upper, r.violations
        ),
    }
}

fn return_counts() -> Outcome {
    let rng = derive_stream(7, "acceptance.returns");
    let one = return_count_mc(1, 100_000, &rng);
    let within = (one.mean - 1.0 / 9.0).abs() <= 3.0 * one.std_err;
    let scaled: Vec<f64> = [100u64, 1000, 10_000]
        .iter()
        .map(|&h| return_count_mc(h, 100_000, &rng.child(&h.to_string())).mean / (h as f64).ln())
        .collect();
    Outcome {
        pass: within && band(&scaled) < 2.0,
        detail: format!(
            "horizon 1: {:.5} ± {:.5}; estimate/ln h = {scaled:.4?}, band {:.3}",
            one.mean,
            one.std_err,
            band(&scaled)
        ),
    }
}

fn hitting_rarity() -> Outcome {
    let (s, n) = (32usize, 1024usize);
    let horizon = hitting_horizon(s, n, DEFAULT_C_H);
    let e = hitting_time_mc(s, horizon, 100_000, &derive_stream(8, "acceptance.hitting"));
    Outcome {
        pass: e.probability() <= 0.01,
        detail: format!(
            "c_h = {DEFAULT_C_H}, horizon {horizon}, P(hit) = {:.5}",
            e.probability()
        ),
    }
}

fn mixing_agreement() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [3usize, 8] {
        for boundary in [Mobility::EdgeStay, Mobility::TorusWrap] {
            let kernel = MoveKernel::new(s, boundary);
            let report = exact_mixing(s, boundary, 1024).unwrap();
            let t_max = 400 * (s * s) as u64 + 1000;
            let agree = mixing_time_powering(&kernel, 0.25, t_max) == report.t_quarter
                && mixing_time_powering(&kernel, report.eps, t_max) == report.t_eps
                && mixing_time_iterate(&kernel, 0.25, t_max) == report.t_quarter;
            let t = report.t_quarter.expect("mixes");
            let tv = empirical_tv_to_uniform(
                &kernel,
                t,
                100_000,
                &mut derive_stream(9, "acceptance.tv"),
            );
            pass &= agree && tv <= 0.27;
            parts.push(format!(
                "s={s} {boundary}: t_mix={t} agree={agree} MC TV={tv:.4}"
            ));
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn conductance() -> Outcome {
    let cycle = conductance_exact(&RggGraph::cycle(4)).unwrap().phi;
    let complete = conductance_exact(&RggGraph::complete(4)).unwrap().phi;
    let rows =
        rgg_conductance_scaling(&[8, 12, 16], &(0..10).collect::<Vec<_>>(), rgg_radius).unwrap();
    let connected: Vec<_> = rows.iter().filter(|r| r.connected).collect();
    let positive = connected.iter().all(|r| r.phi > 0.0);
    Outcome {
        pass: cycle == 0.5 && complete == 2.0 / 3.0 && positive && !connected.is_empty(),
        detail: format!(
            "cycle4 {cycle}, complete4 {complete}, {}/{} RGG instances connected, all with phi > 0: {positive}",
            connected.len(),
            rows.len()
        ),
    }
}

fn phy_constancy() -> Outcome {
    let mut rates = Vec::new();
    let mut counts = Vec::new();
    for n in [256usize, 1024] {
        let mut c = SimConfig::new(n, 1, 1.0 / 8.0);
        c.phy_mode = PhyMode::Sinr;
        let c = validate(&c).unwrap();
        let slots = (10_000.0 / (c.theta * n as f64)).ceil() as u64 + 5;
        let e = estimate_success_constant(&c, slots, &mut derive_stream(11, "acceptance.phy"));
        rates.push(e.rate());
        counts.push(e.pairings);
    }
    let rel = (rates[0] - rates[1]).abs() / rates[0].min(rates[1]);
    Outcome {
        pass: rel < 0.2 && counts.iter().all(|&c| c >= 10_000),
        detail: format!(
            "success rate n=256 {:.4}, n=1024 {:.4} ({counts:?} pairings), rel diff {rel:.3}",
            rates[0], rates[1]
        ),
    }
}

fn determinism_and_conservation() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (phy, mobility) in [
        (PhyMode::Sinr, Mobility::EdgeStay),
        (PhyMode::Bernoulli, Mobility::Static),
    ] {
        let mut c = SimConfig::new(200, 8, 0.2);
        c.phy_mode = phy;
        c.mobility = mobility;
        c.injection = InjectionSchedule::LateStar { w: 3 };
        c.seed = 12;
        c.max_slots = 200_000;
        let a = serde_json::to_vec(&run(&c).unwrap()).unwrap();
        let b = serde_json::to_vec(&run(&c).unwrap()).unwrap();
        pass &= a == b;

        let mut world = World::new(&c).unwrap();
        let mut slots = 0u64;
        while !world.stop_satisfied() && world.slot() < c.max_slots {
            let before: u64 = world.holders().iter().map(|&h| h as u64).sum::<u64>()
                + world.wasted().iter().sum::<u64>();
            let out = world.run_slot();
            let after: u64 = world.holders().iter().map(|&h| h as u64).sum::<u64>()
                + world.wasted().iter().sum::<u64>();
            let injected = out.injected.len() as u64;
            pass &= out.deliveries.len() as u64 + injected == after - before;
            let mut receivers: Vec<usize> = out.deliveries.iter().map(|d| d.receiver).collect();
            receivers.sort_unstable();
            pass &= receivers.windows(2).all(|w| w[0] != w[1]);
            slots += 1;
        }
        notes.push(format!(
            "{phy}/{mobility}: {} bytes identical, {slots} slots checked",
            a.len()
        ));
    }
    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

fn report(failed: &mut Vec<usize>, id: usize, name: &str, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let o = f();
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:>2} {verdict} {name}: {} [{:.1}s]",
        o.detail,
        start.elapsed().as_secs_f64()
    );
    if !o.pass {
        failed.push(id);
    }
}

fn main() {
    let mut failed = Vec::new();
    report(
        &mut failed,
        1,
        "full-mobility single-message shape",
        full_mobility_shape,
    );
    report(&mut failed, 2, "velocity speedup", velocity_speedup);
    report(
        &mut failed,
        3,
        "mobile multi-message near-optimality",
        mobile_near_optimal,
    );
    let static_runs: Vec<MetricsSeries> = (0..10).map(|r| static_late(500 + r)).collect();
    report(&mut failed, 4, "static late-injection slowdown", || {
        late_slowdown(&static_runs)
    });
    report(&mut failed, 5, "strip geometric decay", || {
        strip_decay(&static_runs)
    });
    report(&mut failed, 6, "concentration envelope", concentration);
    report(
        &mut failed,
        7,
        "return-count logarithmic shape",
        return_counts,
    );
    report(&mut failed, 8, "hitting-time rarity", hitting_rarity);
    report(
        &mut failed,
        9,
        "mixing-time oracle agreement",
        mixing_agreement,
    );
    report(&mut failed, 10, "conductance brute force", conductance);
    report(&mut failed, 11, "PHY constancy", phy_constancy);
    report(
        &mut failed,
        12,
        "determinism and conservation",
        determinism_and_conservation,
    );
    if failed.is_empty() {
        println!("acceptance: all 12 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
