//! QUBO optimisers. Every solver minimises; maximise-sense problems are
//! negated at this boundary (see [`QuboProblem::energy`]).
//!
//! [`QuboProblem::energy`]: crate::qubo::QuboProblem::energy

mod anneal;
mod exhaustive;
mod hybrid;
mod reverse;
mod schedule;
mod spvar;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::QuboProblem;
use crate::shapes::Partition;

pub use anneal::{sample_ising, simulated_anneal, IsingSamples, SimulatedAnnealer};
pub use exhaustive::{exhaustive, ExhaustiveSolver, EXHAUSTIVE_MAX};
pub use hybrid::hybrid_seed_iterate;
pub use reverse::{reverse_anneal, reverse_anneal_best_of, reverse_schedules};
pub use schedule::AnnealSchedule;
pub use spvar::{spvar, SpvarConfig, SpvarOutcome, SpvarStart};

/// Sampling budget and temperature range shared by the annealers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub num_reads: usize,
    /// Monte Carlo sweeps per unit of schedule time.
    pub sweeps_per_unit_time: usize,
    /// Inverse temperature at `s = 0`, in units of the problem's energies.
    pub beta_min: f64,
    /// Inverse temperature at `s = 1`.
    pub beta_max: f64,
    pub rng_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            num_reads: 100,
            sweeps_per_unit_time: 50,
            beta_min: 0.1,
            beta_max: 50.0,
            rng_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::InvalidConfig("num_reads must be at least 1".into()));
        }
        if self.sweeps_per_unit_time == 0 {
            return Err(Error::InvalidConfig("sweeps_per_unit_time must be at least 1".into()));
        }
        if !(self.beta_min > 0.0 && self.beta_min < self.beta_max && self.beta_max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < beta_min < beta_max, got {} and {}",
                self.beta_min, self.beta_max
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_reads(mut self, num_reads: usize) -> Self {
        self.num_reads = num_reads;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub config: serde_json::Value,
    /// Variables fixed by variable reduction, if any.
    #[serde(default)]
    pub fixed: BTreeMap<usize, bool>,
}

impl Provenance {
    pub(crate) fn new(method: &str, config: impl Serialize) -> Self {
        Self {
            method: method.to_string(),
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            fixed: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_assignment: Partition,
    /// Minimum of `read_energies`.
    pub best_energy: f64,
    pub read_energies: Vec<f64>,
    /// Best-seen assignment of each read.
    pub samples: Vec<Partition>,
    pub reads_used: usize,
    pub sweeps_used: usize,
    pub wall_time: f64,
    pub provenance: Provenance,
}

impl SolveResult {
    /// Assembles a result from per-read outcomes; the first read reaching the
    /// minimum energy wins.
    pub(crate) fn from_reads(
        samples: Vec<Partition>,
        read_energies: Vec<f64>,
        sweeps_used: usize,
        wall_time: f64,
        provenance: Provenance,
    ) -> Self {
        let (best_idx, best_energy) = read_energies
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, be), (i, e)| if e < be { (i, e) } else { (bi, be) });
        Self {
            best_assignment: samples[best_idx].clone(),
            best_energy,
            reads_used: read_energies.len(),
            read_energies,
            samples,
            sweeps_used,
            wall_time,
            provenance,
        }
    }

    /// Best energy among the first `reads` reads.
    pub fn best_energy_within(&self, reads: usize) -> Option<(f64, &Partition)> {
        self.read_energies
            .iter()
            .zip(&self.samples)
            .take(reads)
            .fold(None, |acc: Option<(f64, &Partition)>, (&e, x)| match acc {
                Some((be, _)) if be <= e => acc,
                _ => Some((e, x)),
            })
    }
}

/// A solver that can be handed any QUBO and a seed. Composite algorithms
/// (variable reduction, the benchmark methods) are written against this.
pub trait QuboSampler: Send + Sync {
    fn name(&self) -> &str;
    fn sample(&self, qubo: &QuboProblem, seed: u64) -> Result<SolveResult>;
}
