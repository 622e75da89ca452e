use std::time::Instant;

use super::{Provenance, QuboSampler, SolveResult};
use crate::error::{Error, Result};
use crate::qubo::QuboProblem;
use crate::shapes::Partition;

pub const EXHAUSTIVE_MAX: usize = 20;

/// Global minimum by Gray-code enumeration of all `2^n` assignments.
///
/// Among assignments tied with the minimum (to `1e-12` of the energy scale)
/// the lexicographically smallest is returned, so a thrust QUBO reports the
/// same canonical representative as the thrust routines.
pub fn exhaustive(qubo: &QuboProblem) -> Result<SolveResult> {
    let started = Instant::now();
    let n = qubo.n();
    if n > EXHAUSTIVE_MAX {
        return Err(Error::TooLarge { n, max: EXHAUSTIVE_MAX });
    }
    let sign = qubo.sense.energy_sign();
    let w = |i: usize, j: usize| sign * qubo.get(i, j);
    let tolerance = 1e-12 * (qubo.max_abs() * (n * n) as f64).max(f64::MIN_POSITIVE);

    // Lexicographic order on bits 0..n equals numeric order on the reversed mask.
    let lex_key = |mask: u32| if n == 0 { 0 } else { mask.reverse_bits() >> (32 - n) };

    let mut x = vec![false; n];
    // g[k] = sum_j w_kj x_j
    let mut g = vec![0.0; n];
    let mut energy = 0.0;
    let mut mask: u32 = 0;
    let mut best_energy = 0.0;
    let mut best_mask: u32 = 0;

    for step in 1u64..(1u64 << n) {
        let k = step.trailing_zeros() as usize;
        let turning_on = !x[k];
        let delta = w(k, k) + 2.0 * (g[k] - w(k, k) * x[k] as u8 as f64);
        energy += if turning_on { delta } else { -delta };
        x[k] = turning_on;
        mask ^= 1 << k;
        let d = if turning_on { 1.0 } else { -1.0 };
        for (j, gj) in g.iter_mut().enumerate() {
            *gj += d * w(j, k);
        }
        if energy < best_energy - tolerance
            || (energy <= best_energy + tolerance && lex_key(mask) < lex_key(best_mask))
        {
            best_energy = best_energy.min(energy);
            best_mask = mask;
        }
    }

    let best = Partition::from_fn(n, |k| (best_mask >> k) & 1 == 1);
    let exact = qubo.energy_bits(best.bits());
    Ok(SolveResult::from_reads(
        vec![best],
        vec![exact],
        0,
        started.elapsed().as_secs_f64(),
        Provenance::new("exhaustive", serde_json::json!({ "n": n })),
    ))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExhaustiveSolver;

impl QuboSampler for ExhaustiveSolver {
    fn name(&self) -> &str {
        "exhaustive"
    }

    fn sample(&self, qubo: &QuboProblem, _seed: u64) -> Result<SolveResult> {
        exhaustive(qubo)
    }
}
