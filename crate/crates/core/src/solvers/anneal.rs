use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{AnnealSchedule, Provenance, QuboSampler, SolveResult, SolverConfig};
use crate::error::Result;
use crate::qubo::{bits_to_spins, spins_to_bits, IsingProblem, QuboProblem};
use crate::rng::{self, StreamRng};
use crate::shapes::Partition;

/// Metropolis acceptance is skipped outright above this `beta * dE`.
const MAX_EXPONENT: f64 = 40.0;

/// Couplings as dense rows for (nearly) fully connected problems, in
/// compressed adjacency form otherwise.
enum Couplings {
    Dense(Vec<f64>),
    Sparse {
        offsets: Vec<usize>,
        neighbours: Vec<(usize, f64)>,
    },
}

/// Ising problem laid out for fast single-spin updates.
pub(crate) struct CompiledIsing {
    h: Vec<f64>,
    couplings: Couplings,
    offset: f64,
}

impl CompiledIsing {
    pub(crate) fn new(problem: &IsingProblem) -> Self {
        let n = problem.n();
        let couplings = if 4 * problem.j.len() >= n * n.saturating_sub(1) {
            let mut dense = vec![0.0; n * n];
            for (&(a, b), &v) in &problem.j {
                dense[a * n + b] += v;
                dense[b * n + a] += v;
            }
            Couplings::Dense(dense)
        } else {
            let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
            for (&(a, b), &v) in &problem.j {
                lists[a].push((b, v));
                lists[b].push((a, v));
            }
            let mut offsets = Vec::with_capacity(n + 1);
            let mut neighbours = Vec::new();
            offsets.push(0);
            for l in lists {
                neighbours.extend(l);
                offsets.push(neighbours.len());
            }
            Couplings::Sparse { offsets, neighbours }
        };
        Self {
            h: problem.h.clone(),
            couplings,
            offset: problem.offset,
        }
    }

    fn n(&self) -> usize {
        self.h.len()
    }

    /// Adds `scale * J_ij` to `field[j]` for every neighbour `j` of `i`.
    #[inline]
    fn spread(&self, i: usize, scale: f64, field: &mut [f64]) {
        match &self.couplings {
            Couplings::Dense(rows) => {
                let n = self.n();
                for (f, &v) in field.iter_mut().zip(&rows[i * n..(i + 1) * n]) {
                    *f += scale * v;
                }
            }
            Couplings::Sparse { offsets, neighbours } => {
                for &(j, v) in &neighbours[offsets[i]..offsets[i + 1]] {
                    field[j] += scale * v;
                }
            }
        }
    }

    /// `h_i + sum_j J_ij s_j` for every spin.
    fn local_fields(&self, spins: &[f64]) -> Vec<f64> {
        let mut field = self.h.clone();
        for (i, &s) in spins.iter().enumerate() {
            self.spread(i, s, &mut field);
        }
        field
    }

    fn energy_of(&self, spins: &[f64], field: &[f64]) -> f64 {
        // sum h s + 1/2 sum_i s_i (field_i - h_i) counts each pair once.
        self.offset
            + spins
                .iter()
                .zip(field)
                .zip(&self.h)
                .map(|((&s, &f), &h)| s * (h + 0.5 * (f - h)))
                .sum::<f64>()
    }

    fn energy(&self, spins: &[f64]) -> f64 {
        self.energy_of(spins, &self.local_fields(spins))
    }

    /// One read: Metropolis sweeps in fixed variable order following `betas`.
    /// Returns the lowest-energy state seen, the start state included.
    pub(crate) fn anneal_read(&self, betas: &[f64], start: Option<&[i8]>, rng: &mut StreamRng) -> (Vec<i8>, f64) {
        let n = self.n();
        let mut spins: Vec<f64> = match start {
            Some(s) => s.iter().map(|&v| f64::from(v)).collect(),
            None => (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
        };
        let mut field = self.local_fields(&spins);
        let mut energy = self.energy_of(&spins, &field);
        let mut best = spins.clone();
        let mut best_energy = energy;

        for &beta in betas {
            for i in 0..n {
                let delta = -2.0 * spins[i] * field[i];
                let accept = delta <= 0.0 || {
                    let x = beta * delta;
                    x < MAX_EXPONENT && rng.random::<f64>() < (-x).exp()
                };
                if accept {
                    spins[i] = -spins[i];
                    energy += delta;
                    self.spread(i, 2.0 * spins[i], &mut field);
                }
            }
            if energy < best_energy {
                best_energy = energy;
                best.copy_from_slice(&spins);
            }
        }
        let exact = self.energy(&best);
        (best.iter().map(|&s| if s > 0.0 { 1 } else { -1 }).collect(), exact)
    }
}

/// Raw per-read output of [`sample_ising`].
#[derive(Debug, Clone)]
pub struct IsingSamples {
    pub states: Vec<Vec<i8>>,
    pub energies: Vec<f64>,
    pub sweeps_per_read: usize,
}

/// Forward (or any) schedule on an Ising problem; read `k` draws from the
/// stream keyed by `(config.rng_seed, k)`.
pub fn sample_ising(problem: &IsingProblem, schedule: &AnnealSchedule, config: &SolverConfig) -> Result<IsingSamples> {
    config.validate()?;
    let compiled = CompiledIsing::new(problem);
    let betas = schedule.betas(config.sweeps_per_unit_time, config.beta_min, config.beta_max);
    let reads: Vec<(Vec<i8>, f64)> = (0..config.num_reads as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(config.rng_seed, &[k]);
            compiled.anneal_read(&betas, None, &mut rng)
        })
        .collect();
    let (states, energies) = reads.into_iter().unzip();
    Ok(IsingSamples {
        states,
        energies,
        sweeps_per_read: betas.len(),
    })
}

#[derive(Serialize)]
struct AnnealEcho<'a> {
    schedule: &'a AnnealSchedule,
    solver: &'a SolverConfig,
}

/// Classical simulated annealing: independent reads from random starts, the
/// inverse temperature following the schedule, best state of each read kept.
pub fn simulated_anneal(qubo: &QuboProblem, schedule: &AnnealSchedule, config: &SolverConfig) -> Result<SolveResult> {
    let started = Instant::now();
    let samples = sample_ising(&qubo.to_ising(), schedule, config)?;
    let assignments: Vec<Partition> = samples
        .states
        .iter()
        .map(|s| Partition::new(spins_to_bits(s)))
        .collect();
    let energies = assignments.iter().map(|x| qubo.energy_bits(x.bits())).collect();
    Ok(SolveResult::from_reads(
        assignments,
        energies,
        samples.sweeps_per_read * config.num_reads,
        started.elapsed().as_secs_f64(),
        Provenance::new("simulated_anneal", AnnealEcho { schedule, solver: config }),
    ))
}

/// Runs reads from a fixed start state; shared by reverse annealing.
pub(crate) fn anneal_from(
    compiled: &CompiledIsing,
    betas: &[f64],
    start: &[bool],
    seed: u64,
    read: u64,
) -> Vec<bool> {
    let mut rng = rng::stream(seed, &[read]);
    let (state, _) = compiled.anneal_read(betas, Some(&bits_to_spins(start)), &mut rng);
    spins_to_bits(&state)
}

/// [`simulated_anneal`] packaged as a [`QuboSampler`]; the seed argument
/// replaces `config.rng_seed`.
#[derive(Debug, Clone)]
pub struct SimulatedAnnealer {
    pub schedule: AnnealSchedule,
    pub config: SolverConfig,
}

impl QuboSampler for SimulatedAnnealer {
    fn name(&self) -> &str {
        "simulated_anneal"
    }

    fn sample(&self, qubo: &QuboProblem, seed: u64) -> Result<SolveResult> {
        simulated_anneal(qubo, &self.schedule, &self.config.with_seed(seed))
    }
}
