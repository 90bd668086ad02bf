use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mobgossip::{
    validate, InjectionSchedule, Mobility, PhyMode, Protocol, SimConfig, StopCondition,
};
use mobgossip_cli::oracle::{self, Oracle};
use mobgossip_cli::plot::{self, PlotSpec};
use mobgossip_cli::replicate_seed;
use mobgossip_cli::row::{write_rows, write_series, ResultRow};
use mobgossip_cli::sweep::{run_sweep, ExperimentSpec};

const EXIT_INCOMPLETE: u8 = 3;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(
    name = "mobgossip",
    version,
    about = "Multi-message gossip over mobile wireless networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration, optionally replicated, and write result rows.
    Run(RunArgs),
    /// Run every point of an experiment spec (JSON) and write result rows.
    Sweep(SweepArgs),
    /// Plot two columns of a result CSV as SVG.
    Plot(PlotArgs),
    /// Run one of the analysis oracles and write its CSV.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with SimConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    protocol: Option<Protocol>,
    #[arg(long)]
    phy: Option<PhyMode>,
    #[arg(long)]
    mobility: Option<Mobility>,
    /// `simultaneous` or `late:<w>`.
    #[arg(long)]
    injection: Option<InjectionSchedule>,
    /// `all_complete`, `message_complete:<i>` or `slot_budget`.
    #[arg(long)]
    stop: Option<StopCondition>,
    #[arg(long)]
    c_success: Option<f64>,
    #[arg(long, env = "MOBGOSSIP_SEED")]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long)]
    max_slots: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-sample holder and waste counts of replicate 0, as CSV.
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    /// ExperimentSpec JSON.
    spec: PathBuf,
    /// Overrides the spec's replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    /// Overrides the spec's root seed.
    #[arg(long, env = "MOBGOSSIP_SEED")]
    seed: Option<u64>,
    /// CSV destination; defaults to `<out_dir>/results.csv`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    csv: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    /// Expression over numeric columns that y is divided by, e.g.
    /// `k * ln(n)^2`.
    #[arg(long)]
    normalize: Option<String>,
    #[arg(long)]
    log_log: bool,
    /// Column that splits points into coloured series.
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    lines: bool,
    /// SVG destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(subcommand)]
    oracle: Oracle,
    /// CSV destination; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

/// Failure classes that map to distinct exit codes.
enum Failure {
    Invalid(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            Box::new(io::BufWriter::new(
                fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
        None => Box::new(io::stdout().lock()),
    })
}

/// JSON parse whose errors name the offending field path.
fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| anyhow::anyhow!("field `{}`: {}", e.path(), e.inner()))
}

fn set_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(j) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .context("configuring worker pool")?;
    }
    Ok(())
}

fn build_config(a: &RunArgs) -> Result<SimConfig, Failure> {
    let mut c = match &a.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_json(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(Failure::Invalid)?
        }
        None => SimConfig::new(256, 1, 1.0 / 3.0),
    };
    macro_rules! set {
        ($($flag:ident => $field:ident),+) => {
            $(if let Some(v) = a.$flag.clone() { c.$field = v; })+
        };
    }
    set!(n => n, k => k, v => v, theta => theta, protocol => protocol, phy => phy_mode,
         mobility => mobility, injection => injection, stop => stop, c_success => c_success,
         seed => seed, max_slots => max_slots);
    validate(&c).map_err(|e| Failure::Invalid(e.into()))
}

fn cmd_run(a: RunArgs) -> Result<bool, Failure> {
    let base = build_config(&a)?;
    if a.replicates == 0 {
        return Err(Failure::Invalid(anyhow::anyhow!(
            "replicates must be at least 1"
        )));
    }
    set_jobs(a.jobs)?;
    use rayon::prelude::*;
    let runs: Vec<(ResultRow, Option<mobgossip::MetricsSeries>)> = (0..a.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = if r == 0 {
                base.seed
            } else {
                replicate_seed(base.seed, 0, r)
            };
            let cfg = base.clone().with_seed(seed);
            let start = Instant::now();
            let m = mobgossip::run(&cfg)?;
            let row = ResultRow::new(0, r, &cfg, &m, start.elapsed());
            Ok((row, (r == 0).then_some(m)))
        })
        .collect::<Result<_>>()?;
    let complete = runs.iter().all(|(row, _)| !row.incomplete);
    if let Some(path) = &a.series {
        let m = runs[0].1.as_ref().expect("replicate 0 keeps its series");
        write_series(sink(Some(path))?, m).context("writing series")?;
    }
    let rows: Vec<ResultRow> = runs.into_iter().map(|(row, _)| row).collect();
    write_rows(sink(a.out.as_deref())?, &rows).context("writing results")?;
    Ok(complete)
}

fn cmd_sweep(a: SweepArgs) -> Result<bool, Failure> {
    let text =
        fs::read_to_string(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    let mut spec: ExperimentSpec = parse_json(&text)
        .with_context(|| format!("parsing {}", a.spec.display()))
        .map_err(Failure::Invalid)?;
    if let Some(r) = a.replicates {
        spec.replicates = r;
    }
    if let Some(s) = a.seed {
        spec.seed = Some(s);
    }
    spec.points().map_err(Failure::Invalid)?;
    set_jobs(a.jobs)?;
    let rows = run_sweep(&spec)?;
    let out = a
        .out
        .or_else(|| spec.out_dir.as_ref().map(|d| d.join("results.csv")));
    write_rows(sink(out.as_deref())?, &rows).context("writing results")?;
    Ok(rows.iter().all(|r| !r.incomplete))
}

fn cmd_plot(a: PlotArgs) -> Result<bool, Failure> {
    let text =
        fs::read_to_string(&a.csv).with_context(|| format!("reading {}", a.csv.display()))?;
    let spec = PlotSpec {
        x: a.x,
        y: a.y,
        normalize: a.normalize,
        log_log: a.log_log,
        group: a.group,
        lines: a.lines,
    };
    let svg = plot::render(&text, &spec).map_err(Failure::Invalid)?;
    sink(a.out.as_deref())?
        .write_all(svg.as_bytes())
        .context("writing svg")?;
    Ok(true)
}

fn cmd_oracle(a: OracleArgs) -> Result<bool, Failure> {
    let table = oracle::run(&a.oracle)?;
    table
        .write(sink(a.out.as_deref())?)
        .context("writing oracle output")?;
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: slot budget reached before completion");
            ExitCode::from(EXIT_INCOMPLETE)
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
