//! Benchmark harness: runs named methods over a dataset against the exact
//! thrust, the parameter scans and the iteration-count study.
//!
//! Every random choice is keyed by the run seed and the event id, so the
//! tables do not depend on thread count or scheduling. Records are sorted by
//! `(event_id, method)` before they are returned.

mod methods;
mod report;
mod scans;
mod stats;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use methods::{
    build_method, method_names, scaled_thrust_qubo, AnnealConfig, ChainedConfig, MethodOutcome, ReverseConfig,
    SpvarMethodConfig, SphericityConfig, ThrustMethod,
};
pub use report::{content_hash, read_csv, write_csv, write_json, Summary};
pub use scans::{
    default_rcs_grid, default_reads_grid, default_time_grid, iteration_histogram, scan_rcs, scan_reads, scan_time,
    IterationReport, IterationRow, IterationSummary, ReadsRow, ScanRow, SeedMethod,
};
pub use stats::{linspace, mean, spearman};

use crate::error::Result;
use crate::events::Event;
use crate::rng;
use crate::shapes::{thrust_exact, ThrustResult};

/// Relative tolerance on `1 - T` for counting a result as exact.
pub const SUCCESS_TOLERANCE: f64 = 1e-6;

/// A method name, an optional display label and its configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub method: String,
    /// Distinguishes two runs of the same method; defaults to `method`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub config: serde_json::Value,
}

impl MethodSpec {
    pub fn new(method: &str) -> Self {
        Self {
            method: method.to_string(),
            label: None,
            config: serde_json::Value::Null,
        }
    }

    pub fn with_config(mut self, config: serde_json::Value) -> Self {
        self.config = config;
        self
    }

    pub fn labelled(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.method)
    }

    pub fn build(&self) -> Result<Box<dyn ThrustMethod>> {
        build_method(&self.method, &self.config)
    }
}

/// The seven compared methods with their default settings.
pub fn comparison_methods() -> Vec<MethodSpec> {
    [
        "sa_default",
        "spvar",
        "reverse",
        "sa_tuned",
        "hybrid_seed_iterate",
        "sphericity_iterate",
        "sa",
    ]
    .into_iter()
    .map(MethodSpec::new)
    .collect()
}

/// True when `method` reproduces `exact` within [`SUCCESS_TOLERANCE`].
pub fn is_success(exact: f64, method: f64) -> bool {
    (method - exact).abs() <= SUCCESS_TOLERANCE * exact.max(1e-12)
}

/// `100 (method - exact) / exact`; undefined for a perfect dijet.
pub fn percent_deviation(exact: f64, method: f64) -> Option<f64> {
    (exact > 0.0).then(|| 100.0 * (method - exact) / exact)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub event_id: u64,
    pub n_particles: usize,
    pub method: String,
    pub exact_one_minus_t: f64,
    pub method_one_minus_t: Option<f64>,
    pub percent_deviation: Option<f64>,
    pub success: bool,
    pub n_iterations: Option<usize>,
    pub break_rate: Option<f64>,
    /// Only filled when timings are requested, to keep outputs reproducible.
    pub wall_time: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: String,
    /// `n_particles` or `one_minus_t`.
    pub binning: String,
    pub bin_low: f64,
    pub bin_high: f64,
    pub events: usize,
    /// Events left out of the deviation mean because `exact 1 - T = 0`.
    pub undefined: usize,
    pub failed: usize,
    pub mean_percent_deviation: Option<f64>,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<AggregateRow>,
    /// Edges of the ten `exact 1 - T` bins.
    pub thrust_bin_edges: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub seed: u64,
    pub record_timings: bool,
}

/// Seed handed to every method for `event_id`. Methods share it, so a
/// method that wraps another sees the same random stream.
pub fn event_seed(seed: u64, event_id: u64) -> u64 {
    rng::derive_seed(seed, &[event_id])
}

/// Runs every method on every event. The exact thrust is always computed as
/// the reference; failures are recorded per event and the run goes on.
pub fn run_dataset(events: &[Event], methods: &[MethodSpec], options: RunOptions) -> Result<DatasetReport> {
    let built: Vec<(String, Box<dyn ThrustMethod>)> = methods
        .iter()
        .map(|m| Ok((m.label().to_string(), m.build()?)))
        .collect::<Result<_>>()?;

    let mut records: Vec<RunRecord> = events
        .par_iter()
        .flat_map_iter(|event| {
            let exact = thrust_exact(event);
            let seed = event_seed(options.seed, event.id);
            built
                .iter()
                .map(|(label, method)| match &exact {
                    Ok(exact) => run_one(event, exact, label, method.as_ref(), seed, options.record_timings),
                    Err(e) => failed_record(event, label, f64::NAN, e.to_string()),
                })
                .collect::<Vec<_>>()
        })
        .collect();
    records.sort_by(|a, b| (a.event_id, &a.method).cmp(&(b.event_id, &b.method)));

    let labels: Vec<String> = built.into_iter().map(|(l, _)| l).collect();
    let (aggregates, thrust_bin_edges) = aggregate(&records, &labels);
    Ok(DatasetReport {
        records,
        aggregates,
        thrust_bin_edges,
    })
}

fn run_one(
    event: &Event,
    exact: &ThrustResult,
    label: &str,
    method: &dyn ThrustMethod,
    seed: u64,
    record_timings: bool,
) -> RunRecord {
    let started = Instant::now();
    let outcome = method
        .run(event, seed)
        .and_then(|o| Ok((ThrustResult::from_partition(event, &o.partition)?, o)));
    let wall_time = record_timings.then(|| started.elapsed().as_secs_f64());
    match outcome {
        Ok((found, o)) => RunRecord {
            event_id: event.id,
            n_particles: event.len(),
            method: label.to_string(),
            exact_one_minus_t: exact.one_minus_t,
            method_one_minus_t: Some(found.one_minus_t),
            percent_deviation: percent_deviation(exact.one_minus_t, found.one_minus_t),
            success: is_success(exact.one_minus_t, found.one_minus_t),
            n_iterations: o.iterations,
            break_rate: o.break_rate,
            wall_time,
            error: None,
        },
        Err(e) => failed_record(event, label, exact.one_minus_t, e.to_string()),
    }
}

fn failed_record(event: &Event, label: &str, exact: f64, error: String) -> RunRecord {
    RunRecord {
        event_id: event.id,
        n_particles: event.len(),
        method: label.to_string(),
        exact_one_minus_t: exact,
        method_one_minus_t: None,
        percent_deviation: None,
        success: false,
        n_iterations: None,
        break_rate: None,
        wall_time: None,
        error: Some(error),
    }
}

/// Ten equal-width bins spanning the observed values.
pub fn bin_edges(values: &[f64]) -> Vec<f64> {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return Vec::new();
    }
    let hi = if hi > lo { hi } else { lo + 1e-12 };
    linspace(lo, hi, 11)
}

fn bin_index(edges: &[f64], v: f64) -> Option<usize> {
    if edges.len() < 2 || !(v >= edges[0] && v <= edges[edges.len() - 1]) {
        return None;
    }
    let bins = edges.len() - 1;
    Some(edges[1..].iter().position(|&e| v < e).unwrap_or(bins - 1))
}

fn aggregate(records: &[RunRecord], labels: &[String]) -> (Vec<AggregateRow>, Vec<f64>) {
    let reference: BTreeMap<u64, f64> = records.iter().map(|r| (r.event_id, r.exact_one_minus_t)).collect();
    let edges = bin_edges(&reference.values().copied().collect::<Vec<_>>());

    let mut rows = Vec::new();
    for label in labels {
        let mine: Vec<&RunRecord> = records.iter().filter(|r| &r.method == label).collect();
        let mut by_n: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
        for r in &mine {
            by_n.entry(r.n_particles).or_default().push(r);
        }
        for (n, group) in by_n {
            rows.push(summarise(label, "n_particles", n as f64, n as f64, &group));
        }
        let mut by_bin: Vec<Vec<&RunRecord>> = vec![Vec::new(); edges.len().saturating_sub(1)];
        for r in &mine {
            if let Some(b) = bin_index(&edges, r.exact_one_minus_t) {
                by_bin[b].push(r);
            }
        }
        for (b, group) in by_bin.iter().enumerate() {
            rows.push(summarise(label, "one_minus_t", edges[b], edges[b + 1], group));
        }
    }
    (rows, edges)
}

fn summarise(label: &str, binning: &str, lo: f64, hi: f64, group: &[&RunRecord]) -> AggregateRow {
    let failed = group.iter().filter(|r| r.error.is_some()).count();
    let ok: Vec<&&RunRecord> = group.iter().filter(|r| r.error.is_none()).collect();
    let devs: Vec<f64> = ok.iter().filter_map(|r| r.percent_deviation).collect();
    let successes = group.iter().filter(|r| r.success).count();
    AggregateRow {
        method: label.to_string(),
        binning: binning.to_string(),
        bin_low: lo,
        bin_high: hi,
        events: group.len(),
        undefined: ok.len() - devs.len(),
        failed,
        mean_percent_deviation: mean(&devs),
        success_rate: if group.is_empty() {
            0.0
        } else {
            successes as f64 / group.len() as f64
        },
    }
}

/// Headline numbers per method over the whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub events: usize,
    pub failed: usize,
    pub undefined: usize,
    pub mean_percent_deviation: Option<f64>,
    pub success_rate: f64,
    pub mean_iterations: Option<f64>,
}

pub fn summarise_methods(report: &DatasetReport) -> Vec<MethodSummary> {
    let mut labels: Vec<&str> = report.records.iter().map(|r| r.method.as_str()).collect();
    labels.sort();
    labels.dedup();
    labels
        .into_iter()
        .map(|label| {
            let group: Vec<&RunRecord> = report.records.iter().filter(|r| r.method == label).collect();
            let s = summarise(label, "all", f64::NAN, f64::NAN, &group);
            let iters: Vec<f64> = group.iter().filter_map(|r| r.n_iterations).map(|k| k as f64).collect();
            MethodSummary {
                method: label.to_string(),
                events: s.events,
                failed: s.failed,
                undefined: s.undefined,
                mean_percent_deviation: s.mean_percent_deviation,
                success_rate: s.success_rate,
                mean_iterations: mean(&iters),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{generate_dataset, GeneratorConfig};

    fn small_events(count: usize) -> Vec<Event> {
        let cfg = GeneratorConfig {
            n_min: 6,
            n_max: 12,
            ..Default::default()
        };
        generate_dataset(&cfg, 0, count).unwrap()
    }

    #[test]
    fn metric_definitions() {
        assert!(is_success(0.1, 0.1 + 5e-8));
        assert!(!is_success(0.1, 0.1 + 2e-7));
        assert!(is_success(0.0, 0.0));
        assert!(!is_success(0.0, 1e-9));
        assert_eq!(percent_deviation(0.0, 0.1), None);
        assert_eq!(percent_deviation(0.2, 0.3).map(|d| (d * 1e9).round() / 1e9), Some(50.0));
    }

    #[test]
    fn exact_against_itself() {
        let events = small_events(12);
        let methods = vec![MethodSpec::new("exact"), MethodSpec::new("brute_force")];
        let report = run_dataset(&events, &methods, RunOptions::default()).unwrap();
        assert_eq!(report.records.len(), 24);
        for r in &report.records {
            assert!(r.success, "{r:?}");
            assert_eq!(r.percent_deviation.map(f64::abs).unwrap_or(0.0), 0.0);
            assert!(r.wall_time.is_none());
        }
        assert_eq!(report.thrust_bin_edges.len(), 11);
        let binned: usize = report
            .aggregates
            .iter()
            .filter(|a| a.binning == "one_minus_t" && a.method == "exact")
            .map(|a| a.events)
            .sum();
        assert_eq!(binned, 12);
    }

    #[test]
    fn records_sorted_and_labelled() {
        let events = small_events(5);
        let methods = vec![
            MethodSpec::new("sphericity_iterate"),
            MethodSpec::new("exact").labelled("a_exact"),
        ];
        let report = run_dataset(&events, &methods, RunOptions::default()).unwrap();
        let keys: Vec<(u64, String)> = report.records.iter().map(|r| (r.event_id, r.method.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(keys[0].1, "a_exact");
        let summary = summarise_methods(&report);
        assert_eq!(summary.len(), 2);
        assert!(summary[1].mean_iterations.is_some());
    }

    #[test]
    fn unknown_method_is_rejected_up_front() {
        assert!(run_dataset(&small_events(1), &[MethodSpec::new("magic")], RunOptions::default()).is_err());
    }

    #[test]
    fn per_event_failures_are_recorded() {
        // brute force refuses more than 20 particles; the run continues.
        let cfg = GeneratorConfig {
            n_min: 21,
            n_max: 22,
            ..Default::default()
        };
        let events = generate_dataset(&cfg, 0, 2).unwrap();
        let report = run_dataset(&events, &[MethodSpec::new("brute_force")], RunOptions::default()).unwrap();
        assert!(report.records.iter().all(|r| r.error.is_some() && !r.success));
        assert!(report.aggregates.iter().all(|a| a.failed == a.events));
    }

    #[test]
    fn bins_cover_range() {
        let e = bin_edges(&[0.1, 0.5, 0.3]);
        assert_eq!(e.len(), 11);
        assert_eq!(bin_index(&e, 0.1), Some(0));
        assert_eq!(bin_index(&e, 0.5), Some(9));
        assert_eq!(bin_index(&e, 0.6), None);
        assert_eq!(bin_edges(&[]).len(), 0);
        assert_eq!(bin_index(&bin_edges(&[0.2]), 0.2), Some(0));
    }
}
