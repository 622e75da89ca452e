use super::SolveResult;
use crate::error::Result;
use crate::events::Event;
use crate::shapes::{default_max_iter, fallback_axis, iterative_thrust, IterativeResult};

/// Seeds the iterative refinement with the jet momentum of a solver's best
/// assignment (hardest particle if that momentum vanishes).
pub fn hybrid_seed_iterate(event: &Event, solve: &SolveResult) -> Result<IterativeResult> {
    let jet = solve.best_assignment.jet_momentum(event)?;
    let seed = jet.unit().unwrap_or_else(|| fallback_axis(event));
    iterative_thrust(event, &seed, default_max_iter(event.len()))
}
