use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::methods::ChainedConfig;
use super::stats::{linspace, mean};
use super::{event_seed, is_success, percent_deviation};
use crate::error::Result;
use crate::events::Event;
use crate::qubo::build_thrust_qubo;
use crate::rng;
use crate::shapes::{default_max_iter, iterative_thrust, sphericity, thrust_exact, ThrustResult};
use crate::solvers::hybrid_seed_iterate;

/// 0.05 to 0.20 in steps of 0.0375, then 0.25 to 2.00 in steps of 0.25.
pub fn default_rcs_grid() -> Vec<f64> {
    let fine = (0..5).map(|k| 0.05 + 0.0375 * k as f64);
    let coarse = (1..=8).map(|k| 0.25 * k as f64);
    fine.chain(coarse).collect()
}

/// Ten annealing times evenly spaced over 1 to 1000.
pub fn default_time_grid() -> Vec<f64> {
    linspace(1.0, 1000.0, 10)
}

pub fn default_reads_grid() -> Vec<usize> {
    vec![100, 1000, 5000, 10000]
}

/// Success rate of one event at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub event_id: u64,
    pub n_particles: usize,
    pub parameter: String,
    pub value: f64,
    pub executions: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_break_rate: f64,
}

/// Success rate of chained solves against the relative chain strength.
/// Execution `k` of an event uses the same seed at every grid value.
pub fn scan_rcs(
    events: &[Event],
    rcs_grid: &[f64],
    base: &ChainedConfig,
    executions: usize,
    seed: u64,
) -> Result<Vec<ScanRow>> {
    scan(events, rcs_grid, executions, seed, "rcs", |v| ChainedConfig { rcs: v, ..base.clone() })
}

/// Success rate of chained solves against the annealing time.
pub fn scan_time(
    events: &[Event],
    time_grid: &[f64],
    base: &ChainedConfig,
    executions: usize,
    seed: u64,
) -> Result<Vec<ScanRow>> {
    scan(events, time_grid, executions, seed, "anneal_time", |v| ChainedConfig {
        anneal_time: v,
        ..base.clone()
    })
}

fn scan(
    events: &[Event],
    grid: &[f64],
    executions: usize,
    seed: u64,
    parameter: &str,
    at: impl Fn(f64) -> ChainedConfig + Sync,
) -> Result<Vec<ScanRow>> {
    let exact: Vec<f64> = events
        .par_iter()
        .map(|e| thrust_exact(e).map(|t| t.one_minus_t))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize, usize)> = (0..events.len())
        .flat_map(|e| (0..grid.len()).flat_map(move |g| (0..executions).map(move |k| (e, g, k))))
        .collect();
    let outcomes: Vec<(bool, f64)> = jobs
        .par_iter()
        .map(|&(e, g, k)| {
            let event = &events[e];
            let (solve, break_rate) =
                at(grid[g]).solve(&build_thrust_qubo(event), rng::derive_seed(seed, &[event.id, k as u64]))?;
            let found = ThrustResult::from_partition(event, &solve.best_assignment)?;
            Ok((is_success(exact[e], found.one_minus_t), break_rate))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(events.len() * grid.len());
    for (chunk, (e, g)) in outcomes
        .chunks(executions.max(1))
        .zip((0..events.len()).flat_map(|e| (0..grid.len()).map(move |g| (e, g))))
    {
        let successes = chunk.iter().filter(|(s, _)| *s).count();
        let breaks: Vec<f64> = chunk.iter().map(|(_, b)| *b).collect();
        rows.push(ScanRow {
            event_id: events[e].id,
            n_particles: events[e].len(),
            parameter: parameter.to_string(),
            value: grid[g],
            executions,
            successes,
            success_rate: if executions == 0 {
                0.0
            } else {
                successes as f64 / executions as f64
            },
            mean_break_rate: mean(&breaks).unwrap_or(0.0),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadsRow {
    pub event_id: u64,
    pub n_particles: usize,
    pub reads: usize,
    pub exact_one_minus_t: f64,
    pub method_one_minus_t: f64,
    pub percent_deviation: Option<f64>,
    pub success: bool,
}

/// Deviation against the number of reads. Each event is solved once with
/// the largest budget and smaller budgets read prefixes of that run, so a
/// larger budget can never do worse.
pub fn scan_reads(events: &[Event], reads_grid: &[usize], base: &ChainedConfig, seed: u64) -> Result<Vec<ReadsRow>> {
    let max_reads = reads_grid.iter().copied().max().unwrap_or(0);
    let per_event: Vec<Vec<ReadsRow>> = events
        .par_iter()
        .map(|event| {
            let exact = thrust_exact(event)?.one_minus_t;
            let config = ChainedConfig {
                num_reads: max_reads.max(1),
                ..base.clone()
            };
            let (solve, _) = config.solve(&build_thrust_qubo(event), event_seed(seed, event.id))?;
            reads_grid
                .iter()
                .map(|&reads| {
                    let (_, x) = solve
                        .best_energy_within(reads.max(1))
                        .expect("at least one read");
                    let found = ThrustResult::from_partition(event, x)?.one_minus_t;
                    Ok(ReadsRow {
                        event_id: event.id,
                        n_particles: event.len(),
                        reads,
                        exact_one_minus_t: exact,
                        method_one_minus_t: found,
                        percent_deviation: percent_deviation(exact, found),
                        success: is_success(exact, found),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_event.into_iter().flatten().collect())
}

/// Where the iterative refinement starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMethod {
    /// Jet momentum of the default-settings chained annealing result.
    SaDefaultSeed,
    /// Leading eigenvector of the linearised sphericity tensor.
    SphericitySeed,
    /// The exact thrust axis.
    ExactAxis,
}

impl SeedMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SeedMethod::SaDefaultSeed => "sa_default_seed",
            SeedMethod::SphericitySeed => "sphericity_seed",
            SeedMethod::ExactAxis => "exact_axis",
        }
    }
}

impl std::str::FromStr for SeedMethod {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sa_default_seed" => Ok(SeedMethod::SaDefaultSeed),
            "sphericity_seed" => Ok(SeedMethod::SphericitySeed),
            "exact_axis" => Ok(SeedMethod::ExactAxis),
            other => Err(crate::error::Error::UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub event_id: u64,
    pub n_particles: usize,
    pub seed_method: SeedMethod,
    pub iterations: usize,
    pub reached_exact: bool,
    pub exact_one_minus_t: f64,
    pub final_one_minus_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub seed_method: SeedMethod,
    pub events: usize,
    pub mean_iterations: f64,
    /// Events per iteration count.
    pub histogram: BTreeMap<usize, usize>,
    /// Fraction reaching the exact optimum within `k` iterations, `k = 0..=3`.
    pub exact_within: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub rows: Vec<IterationRow>,
    pub summaries: Vec<IterationSummary>,
}

/// Iterations the refinement needs from each seed. The annealing seed uses
/// the same per-event seed as the dataset runs.
pub fn iteration_histogram(
    events: &[Event],
    seed_methods: &[SeedMethod],
    sa_default: &ChainedConfig,
    seed: u64,
) -> Result<IterationReport> {
    let per_event: Vec<Vec<IterationRow>> = events
        .par_iter()
        .map(|event| {
            let exact = thrust_exact(event)?;
            seed_methods
                .iter()
                .map(|&m| {
                    let it = match m {
                        SeedMethod::SaDefaultSeed => {
                            let (solve, _) = sa_default.solve(&build_thrust_qubo(event), event_seed(seed, event.id))?;
                            hybrid_seed_iterate(event, &solve)?
                        }
                        SeedMethod::SphericitySeed => {
                            iterative_thrust(event, &sphericity(event, 1)?.axis, default_max_iter(event.len()))?
                        }
                        SeedMethod::ExactAxis => iterative_thrust(event, &exact.axis, default_max_iter(event.len()))?,
                    };
                    Ok(IterationRow {
                        event_id: event.id,
                        n_particles: event.len(),
                        seed_method: m,
                        iterations: it.iterations,
                        reached_exact: is_success(exact.one_minus_t, it.result.one_minus_t),
                        exact_one_minus_t: exact.one_minus_t,
                        final_one_minus_t: it.result.one_minus_t,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<IterationRow> = per_event.into_iter().flatten().collect();

    let summaries = seed_methods
        .iter()
        .map(|&m| {
            let mine: Vec<&IterationRow> = rows.iter().filter(|r| r.seed_method == m).collect();
            let mut histogram = BTreeMap::new();
            for r in &mine {
                *histogram.entry(r.iterations).or_insert(0) += 1;
            }
            let n = mine.len().max(1) as f64;
            IterationSummary {
                seed_method: m,
                events: mine.len(),
                mean_iterations: mean(&mine.iter().map(|r| r.iterations as f64).collect::<Vec<_>>()).unwrap_or(0.0),
                histogram,
                exact_within: (0..=3)
                    .map(|k| mine.iter().filter(|r| r.reached_exact && r.iterations <= k).count() as f64 / n)
                    .collect(),
            }
        })
        .collect();
    Ok(IterationReport { rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{generate_dataset, GeneratorConfig};

    fn events(count: usize, n_min: usize, n_max: usize) -> Vec<Event> {
        let cfg = GeneratorConfig {
            n_min,
            n_max,
            ..Default::default()
        };
        generate_dataset(&cfg, 0, count).unwrap()
    }

    fn quick() -> ChainedConfig {
        ChainedConfig {
            num_reads: 8,
            anneal_time: 2.0,
            ..ChainedConfig::default_analog()
        }
    }

    #[test]
    fn default_grids() {
        let g = default_rcs_grid();
        assert_eq!(g.len(), 13);
        assert!((g[4] - 0.2).abs() < 1e-12);
        assert_eq!(g[5], 0.25);
        assert_eq!(g[12], 2.0);
        assert_eq!(default_time_grid().len(), 10);
        assert_eq!(default_reads_grid(), vec![100, 1000, 5000, 10000]);
    }

    #[test]
    fn scan_shapes() {
        let ev = events(2, 8, 10);
        let rows = scan_rcs(&ev, &[0.2, 1.0, 2.0], &quick(), 3, 5).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.success_rate) && r.executions == 3));
        assert_eq!(rows[1].value, 1.0);
        let rows = scan_time(&ev, &[1.0, 4.0], &quick(), 2, 5).unwrap();
        assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![1.0, 4.0, 1.0, 4.0]);
    }

    #[test]
    fn more_reads_never_hurt() {
        let ev = events(3, 10, 14);
        let rows = scan_reads(&ev, &[1, 4, 16], &quick(), 9).unwrap();
        assert_eq!(rows.len(), 9);
        for chunk in rows.chunks(3) {
            assert!(chunk[1].method_one_minus_t <= chunk[0].method_one_minus_t + 1e-12);
            assert!(chunk[2].method_one_minus_t <= chunk[1].method_one_minus_t + 1e-12);
        }
    }

    #[test]
    fn iteration_study_shape() {
        let ev = events(6, 8, 14);
        let methods = [SeedMethod::SaDefaultSeed, SeedMethod::SphericitySeed, SeedMethod::ExactAxis];
        let r = iteration_histogram(&ev, &methods, &quick(), 1).unwrap();
        assert_eq!(r.rows.len(), 18);
        for s in &r.summaries {
            assert_eq!(s.histogram.values().sum::<usize>(), 6);
            assert!(s.exact_within.windows(2).all(|w| w[0] <= w[1]));
        }
        let exact = &r.summaries[2];
        assert_eq!(exact.histogram.get(&0), Some(&6));
        assert_eq!(exact.exact_within[0], 1.0);
        assert_eq!("sphericity_seed".parse::<SeedMethod>().unwrap(), SeedMethod::SphericitySeed);
    }
}
