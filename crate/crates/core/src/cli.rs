//! Command-line front end. Every command that produces a table writes it as
//! CSV to `--out` and a JSON summary (configuration echo, event-file hash,
//! headline metrics) next to it as `<stem>.summary.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{
    self, comparison_methods, content_hash, default_rcs_grid, default_reads_grid, default_time_grid, mean,
    spearman, write_csv, write_json, ChainedConfig, MethodSpec, RunOptions, ScanRow, SeedMethod, Summary,
};
use crate::error::{Error, Result};
use crate::events::{generate_dataset, load_events, save_events, Event, GeneratorConfig};
use crate::shapes::{sphericity, thrust_exact};

#[derive(Debug, Parser)]
#[command(name = "thrust", version, about = "Two-jet clustering by thrust: exact, annealing and hybrid solvers")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a toy dijet dataset.
    Gen(GenArgs),
    /// Exact thrust of every event.
    Exact(CommonArgs),
    /// Run one method over a dataset.
    Solve(SolveArgs),
    /// Success rate against relative chain strength.
    ScanRcs(CommonArgs),
    /// Success rate against annealing time.
    ScanTime(CommonArgs),
    /// Deviation against the number of reads.
    ScanReads(CommonArgs),
    /// Run the seven compared methods.
    Compare(CommonArgs),
    /// Iterations needed from each seed axis.
    Iters(CommonArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Output event file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub first_id: u64,
    /// JSON config; its `generator` object is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the generator seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input event file.
    #[arg(long)]
    pub events: PathBuf,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Registered method name.
    #[arg(long)]
    pub method: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Contents of the `--config` file. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub generator: GeneratorConfig,
    /// Method configuration for `solve`.
    pub method_config: serde_json::Value,
    /// Method list for `compare`; the seven defaults when absent.
    pub methods: Option<Vec<MethodSpec>>,
    /// Chained-solver overrides for the scans and the annealing seed of `iters`.
    pub solver: serde_json::Value,
    /// Grid for `scan-rcs` or `scan-time`.
    pub grid: Option<Vec<f64>>,
    pub reads_grid: Option<Vec<usize>>,
    pub executions: usize,
    pub seed_methods: Vec<SeedMethod>,
    /// Use only the first `max_events` events.
    pub max_events: Option<usize>,
    /// Adds wall-clock times to records. Outputs then differ between runs.
    pub record_timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            generator: GeneratorConfig::default(),
            method_config: serde_json::Value::Null,
            methods: None,
            solver: serde_json::Value::Null,
            grid: None,
            reads_grid: None,
            executions: 40,
            seed_methods: vec![SeedMethod::SaDefaultSeed, SeedMethod::SphericitySeed],
            max_events: None,
            record_timings: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }

    fn chained(&self) -> Result<ChainedConfig> {
        let m = bench::build_method("chained", &self.solver)?;
        Ok(serde_json::from_value(m.config())?)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Exact(a) => exact(a),
        Command::Solve(a) => solve(a),
        Command::ScanRcs(a) => scan_rcs(a),
        Command::ScanTime(a) => scan_time(a),
        Command::ScanReads(a) => scan_reads(a),
        Command::Compare(a) => compare(a),
        Command::Iters(a) => iters(a),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let mut config = RunConfig::load(a.config.as_deref())?.generator;
    if let Some(seed) = a.seed {
        config.rng_seed = seed;
    }
    let events = generate_dataset(&config, a.first_id, a.count)?;
    save_events(&a.out, &events)?;
    println!("wrote {} events to {}", events.len(), a.out.display());
    Ok(())
}

/// Loaded inputs shared by the table-producing commands.
struct Inputs {
    config: RunConfig,
    events: Vec<Event>,
    events_hash: String,
}

fn inputs(a: &CommonArgs) -> Result<Inputs> {
    let config = RunConfig::load(a.config.as_deref())?;
    let bytes = std::fs::read(&a.events).map_err(|e| Error::io(&a.events, e))?;
    let mut events = load_events(&a.events)?;
    if let Some(m) = config.max_events {
        events.truncate(m);
    }
    Ok(Inputs {
        config,
        events,
        events_hash: content_hash(&bytes),
    })
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}.summary.json"))
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn finish(a: &CommonArgs, inputs: &Inputs, command: &str, config: serde_json::Value, metrics: serde_json::Value) -> Result<()> {
    let summary = Summary {
        command: command.to_string(),
        seed: a.seed,
        config,
        events_file: a.events.file_name().and_then(|s| s.to_str()).map(str::to_string),
        events_hash: Some(inputs.events_hash.clone()),
        events: inputs.events.len(),
        metrics,
    };
    write_json(summary_path(&a.out), &summary)?;
    println!("{command}: {} events -> {}", inputs.events.len(), a.out.display());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    pub event_id: u64,
    pub n_particles: usize,
    pub thrust: f64,
    pub one_minus_t: f64,
    pub axis_x: f64,
    pub axis_y: f64,
    pub axis_z: f64,
    pub partition: String,
    pub sphericity: f64,
}

fn exact(a: CommonArgs) -> Result<()> {
    use rayon::prelude::*;
    let inp = inputs(&a)?;
    let rows: Vec<ExactRow> = inp
        .events
        .par_iter()
        .map(|e| {
            let t = thrust_exact(e)?;
            Ok(ExactRow {
                event_id: e.id,
                n_particles: e.len(),
                thrust: t.thrust,
                one_minus_t: t.one_minus_t,
                axis_x: t.axis.px,
                axis_y: t.axis.py,
                axis_z: t.axis.pz,
                partition: t.partition.to_string(),
                sphericity: sphericity(e, 2)?.sphericity,
            })
        })
        .collect::<Result<_>>()?;
    write_csv(&a.out, &rows)?;
    let omt: Vec<f64> = rows.iter().map(|r| r.one_minus_t).collect();
    finish(
        &a,
        &inp,
        "exact",
        serde_json::json!({}),
        serde_json::json!({ "mean_one_minus_t": mean(&omt) }),
    )
}

fn run_methods(a: &CommonArgs, inp: &Inputs, command: &str, methods: Vec<MethodSpec>) -> Result<()> {
    let options = RunOptions {
        seed: a.seed,
        record_timings: inp.config.record_timings,
    };
    let report = bench::run_dataset(&inp.events, &methods, options)?;
    write_csv(&a.out, &report.records)?;
    write_csv(sibling(&a.out, "aggregates"), &report.aggregates)?;
    let echo: Vec<serde_json::Value> = methods
        .iter()
        .map(|m| {
            let config = m.build().map(|b| b.config()).unwrap_or_default();
            serde_json::json!({ "method": m.method, "label": m.label(), "config": config })
        })
        .collect();
    finish(
        a,
        inp,
        command,
        serde_json::json!({ "methods": echo, "record_timings": options.record_timings }),
        serde_json::json!({
            "methods": bench::summarise_methods(&report),
            "thrust_bin_edges": report.thrust_bin_edges,
        }),
    )
}

fn solve(a: SolveArgs) -> Result<()> {
    let inp = inputs(&a.common)?;
    let spec = MethodSpec::new(&a.method).with_config(inp.config.method_config.clone());
    run_methods(&a.common, &inp, "solve", vec![spec])
}

fn compare(a: CommonArgs) -> Result<()> {
    let inp = inputs(&a)?;
    let methods = inp.config.methods.clone().unwrap_or_else(comparison_methods);
    run_methods(&a, &inp, "compare", methods)
}

/// Mean success, break rate and event count at each grid value.
fn scan_metrics(rows: &[ScanRow]) -> serde_json::Value {
    let mut by_value: BTreeMap<u64, (f64, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        let e = by_value.entry(r.value.to_bits()).or_insert((r.value, Vec::new(), Vec::new()));
        e.1.push(r.success_rate);
        e.2.push(r.mean_break_rate);
    }
    let mut table: Vec<(f64, serde_json::Value)> = by_value
        .into_values()
        .map(|(v, s, b)| {
            (
                v,
                serde_json::json!({ "value": v, "mean_success_rate": mean(&s), "mean_break_rate": mean(&b) }),
            )
        })
        .collect();
    table.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let breaks: Vec<f64> = rows.iter().map(|r| r.mean_break_rate).collect();
    serde_json::json!({
        "per_value": table.into_iter().map(|(_, j)| j).collect::<Vec<_>>(),
        "break_rate_spearman": spearman(&values, &breaks),
    })
}

fn scan_rcs(a: CommonArgs) -> Result<()> {
    let inp = inputs(&a)?;
    let base = inp.config.chained()?;
    let grid = inp.config.grid.clone().unwrap_or_else(default_rcs_grid);
    let rows = bench::scan_rcs(&inp.events, &grid, &base, inp.config.executions, a.seed)?;
    write_csv(&a.out, &rows)?;
    finish(
        &a,
        &inp,
        "scan-rcs",
        serde_json::json!({ "solver": base, "grid": grid, "executions": inp.config.executions }),
        scan_metrics(&rows),
    )
}

fn scan_time(a: CommonArgs) -> Result<()> {
    let inp = inputs(&a)?;
    let base = inp.config.chained()?;
    let grid = inp.config.grid.clone().unwrap_or_else(default_time_grid);
    let rows = bench::scan_time(&inp.events, &grid, &base, inp.config.executions, a.seed)?;
    write_csv(&a.out, &rows)?;
    finish(
        &a,
        &inp,
        "scan-time",
        serde_json::json!({ "solver": base, "grid": grid, "executions": inp.config.executions }),
        scan_metrics(&rows),
    )
}

fn scan_reads(a: CommonArgs) -> Result<()> {
    let inp = inputs(&a)?;
    let base = inp.config.chained()?;
    let grid = inp.config.reads_grid.clone().unwrap_or_else(default_reads_grid);
    let rows = bench::scan_reads(&inp.events, &grid, &base, a.seed)?;
    write_csv(&a.out, &rows)?;
    let per_budget: Vec<serde_json::Value> = grid
        .iter()
        .map(|&reads| {
            let devs: Vec<f64> = rows.iter().filter(|r| r.reads == reads).filter_map(|r| r.percent_deviation).collect();
            let succ: Vec<f64> = rows
                .iter()
                .filter(|r| r.reads == reads)
                .map(|r| f64::from(u8::from(r.success)))
                .collect();
            serde_json::json!({
                "reads": reads,
                "mean_percent_deviation": mean(&devs),
                "success_rate": mean(&succ),
            })
        })
        .collect();
    finish(
        &a,
        &inp,
        "scan-reads",
        serde_json::json!({ "solver": base, "reads_grid": grid }),
        serde_json::json!({ "per_budget": per_budget }),
    )
}

fn iters(a: CommonArgs) -> Result<()> {
    let inp = inputs(&a)?;
    let base = inp.config.chained()?;
    let report = bench::iteration_histogram(&inp.events, &inp.config.seed_methods, &base, a.seed)?;
    write_csv(&a.out, &report.rows)?;
    finish(
        &a,
        &inp,
        "iters",
        serde_json::json!({ "sa_default": base, "seed_methods": inp.config.seed_methods }),
        serde_json::json!({ "summaries": report.summaries }),
    )
}
