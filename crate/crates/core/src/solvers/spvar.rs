use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Provenance, QuboSampler, SolveResult};
use crate::error::{Error, Result};
use crate::qubo::QuboProblem;
use crate::rng;
use crate::shapes::Partition;

/// Multi-start sample-persistence variable reduction settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpvarConfig {
    pub num_starts: usize,
    /// Minimum fraction of elite samples that must agree on a variable's
    /// value before it is fixed.
    pub fixing_threshold: f64,
    /// Percentage of the surviving samples kept, best first.
    pub elite_threshold: f64,
    /// Samples whose objective (larger is better) falls below this floor are
    /// discarded before the elite cut.
    pub energy_floor: Option<f64>,
}

impl Default for SpvarConfig {
    fn default() -> Self {
        Self {
            num_starts: 10,
            fixing_threshold: 0.65,
            elite_threshold: 100.0,
            energy_floor: None,
        }
    }
}

impl SpvarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_starts == 0 {
            return Err(Error::InvalidConfig("num_starts must be at least 1".into()));
        }
        if !(self.fixing_threshold > 0.5 && self.fixing_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "fixing_threshold must lie in (0.5, 1], got {}",
                self.fixing_threshold
            )));
        }
        if !(self.elite_threshold > 0.0 && self.elite_threshold <= 100.0) {
            return Err(Error::InvalidConfig(format!(
                "elite_threshold must lie in (0, 100], got {}",
                self.elite_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpvarStart {
    pub free_before: usize,
    pub elite_size: usize,
    pub newly_fixed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpvarOutcome {
    /// Reads of every start, energies on the full problem. Provenance holds
    /// the final fixed-variable map.
    pub result: SolveResult,
    pub starts: Vec<SpvarStart>,
}

/// Multi-start SPVAR.
///
/// Each start samples the residual problem with `inner`, scores the samples
/// on the full problem, drops those below the floor, keeps the elite
/// percentile and fixes every free variable on which at least
/// `fixing_threshold` of the elite agree. The first start uses `seed`
/// unchanged, so its reads coincide with a plain run of `inner`. The
/// reported best is the lowest full-problem energy over all starts.
pub fn spvar(qubo: &QuboProblem, config: &SpvarConfig, inner: &dyn QuboSampler, seed: u64) -> Result<SpvarOutcome> {
    config.validate()?;
    let started = Instant::now();
    let n = qubo.n();
    let mut fixed: BTreeMap<usize, bool> = BTreeMap::new();
    let mut samples: Vec<Partition> = Vec::new();
    let mut energies: Vec<f64> = Vec::new();
    let mut sweeps = 0;
    let mut starts = Vec::new();

    for start in 0..config.num_starts {
        let reduced = qubo.fix_variables(&fixed)?;
        if reduced.free.is_empty() {
            break;
        }
        let start_seed = if start == 0 { seed } else { rng::derive_seed(seed, &[start as u64]) };
        let run = inner.sample(&reduced.problem, start_seed)?;
        sweeps += run.sweeps_used;

        let first = samples.len();
        for residual in &run.samples {
            let full = reduced.assemble(residual.bits());
            energies.push(qubo.energy_bits(full.bits()));
            samples.push(full);
        }

        let mut pool: Vec<usize> = (first..samples.len())
            .filter(|&k| config.energy_floor.is_none_or(|floor| -energies[k] >= floor))
            .collect();
        pool.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
        let keep = ((pool.len() as f64 * config.elite_threshold / 100.0).ceil() as usize).min(pool.len());
        let elite = &pool[..keep];

        let mut newly_fixed = 0;
        if !elite.is_empty() {
            for &var in &reduced.free {
                let ones = elite.iter().filter(|&&k| samples[k].get(var)).count();
                let majority = 2 * ones > elite.len();
                let agree = if majority { ones } else { elite.len() - ones };
                if agree as f64 >= config.fixing_threshold * elite.len() as f64 {
                    fixed.insert(var, majority);
                    newly_fixed += 1;
                }
            }
        }
        starts.push(SpvarStart {
            free_before: reduced.free.len(),
            elite_size: elite.len(),
            newly_fixed,
        });
    }

    if fixed.len() == n {
        let x = Partition::from_fn(n, |k| fixed[&k]);
        energies.push(qubo.energy_bits(x.bits()));
        samples.push(x);
    }

    let mut provenance = Provenance::new(
        "spvar",
        serde_json::json!({ "spvar": config, "inner": inner.name() }),
    );
    provenance.fixed = fixed;
    Ok(SpvarOutcome {
        result: SolveResult::from_reads(samples, energies, sweeps, started.elapsed().as_secs_f64(), provenance),
        starts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{generate_dijet_event, GeneratorConfig};
    use crate::qubo::build_thrust_qubo;
    use crate::solvers::{exhaustive, AnnealSchedule, SimulatedAnnealer, SolverConfig};

    /// Returns the same assignment for every read.
    struct Constant(Partition);

    impl QuboSampler for Constant {
        fn name(&self) -> &str {
            "constant"
        }
        fn sample(&self, qubo: &QuboProblem, _seed: u64) -> Result<SolveResult> {
            let x = Partition::new(self.0.bits()[..qubo.n()].to_vec());
            let e = qubo.energy_bits(x.bits());
            Ok(SolveResult::from_reads(vec![x; 4], vec![e; 4], 0, 0.0, Provenance::new("constant", ())))
        }
    }

    fn problem(n: usize, id: u64) -> QuboProblem {
        let cfg = GeneratorConfig { n_min: n, n_max: n, ..Default::default() };
        build_thrust_qubo(&generate_dijet_event(&cfg, id).unwrap()).auto_scale().unwrap()
    }

    #[test]
    fn unanimous_reads_fix_everything() {
        let q = problem(8, 0);
        let x = Partition::from_fn(8, |k| k % 2 == 1);
        let cfg = SpvarConfig { fixing_threshold: 1.0, ..Default::default() };
        let out = spvar(&q, &cfg, &Constant(x.clone()), 0).unwrap();
        assert_eq!(out.starts.len(), 1);
        assert_eq!(out.starts[0].newly_fixed, 8);
        assert_eq!(out.result.provenance.fixed.len(), 8);
        for (k, v) in &out.result.provenance.fixed {
            assert_eq!(x.get(*k), *v);
        }
    }

    #[test]
    fn floor_can_empty_the_elite() {
        let q = problem(8, 1);
        let cfg = SpvarConfig { energy_floor: Some(1e9), num_starts: 3, ..Default::default() };
        let out = spvar(&q, &cfg, &Constant(Partition::zeros(8)), 0).unwrap();
        assert!(out.starts.iter().all(|s| s.elite_size == 0 && s.newly_fixed == 0));
        assert_eq!(out.starts.len(), 3);
    }

    #[test]
    fn first_start_matches_plain_sampler() {
        let q = problem(12, 2);
        let inner = SimulatedAnnealer {
            schedule: AnnealSchedule::forward(2.0).unwrap(),
            config: SolverConfig::default().with_reads(20),
        };
        let plain = inner.sample(&q, 77).unwrap();
        let out = spvar(&q, &SpvarConfig::default(), &inner, 77).unwrap();
        assert_eq!(&out.result.read_energies[..20], &plain.read_energies[..]);
        assert!(out.result.best_energy <= plain.best_energy);
        let opt = exhaustive(&q).unwrap();
        assert!(out.result.best_energy >= opt.best_energy - 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SpvarConfig { fixing_threshold: 0.5, ..Default::default() }.validate().is_err());
        assert!(SpvarConfig { elite_threshold: 0.0, ..Default::default() }.validate().is_err());
        assert!(SpvarConfig { num_starts: 0, ..Default::default() }.validate().is_err());
    }
}
