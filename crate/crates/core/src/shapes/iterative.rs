use serde::{Deserialize, Serialize};

use super::thrust::split_by_axis;
use super::{Partition, ThrustResult};
use crate::error::{Error, Result};
use crate::events::{Event, Momentum3};

/// Two axes closer than this are the same fixed point.
const AXIS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterativeResult {
    pub result: ThrustResult,
    /// Number of axis updates performed. Zero when the seed already points
    /// along the jet momentum of the hemisphere it selects.
    pub iterations: usize,
    /// Set when a vanishing jet momentum forced the hardest-particle axis.
    pub fallback_used: bool,
    /// `|P|` of each visited partition, in order.
    pub momentum_history: Vec<f64>,
}

/// Direction of the hardest particle, used whenever a jet momentum vanishes.
pub fn fallback_axis(event: &Event) -> Momentum3 {
    event.particles[event.hardest()]
        .momentum
        .unit()
        .unwrap_or(Momentum3::new(0.0, 0.0, 1.0))
}

/// Upper bound on the number of distinct hemisphere partitions, plus one.
pub fn default_max_iter(n: usize) -> usize {
    n * n.saturating_sub(1) / 2 + 1
}

/// Refines a hemisphere split by alternating two steps: split the event by
/// the plane perpendicular to the current axis, then point the axis along
/// the resulting jet momentum. Stops at a fixed point or after `max_iter`
/// axis updates. `|P|` never decreases along the way.
pub fn iterative_thrust(event: &Event, seed_axis: &Momentum3, max_iter: usize) -> Result<IterativeResult> {
    let mut axis = seed_axis.unit().ok_or(Error::ZeroAxis)?;
    if max_iter == 0 {
        return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
    }
    let mut partition = split_by_axis(event, &axis);
    let mut jet = partition.jet_momentum(event)?;
    let mut history = vec![jet.norm()];
    let mut iterations = 0;
    let mut fallback_used = false;

    loop {
        let next_axis = match jet.unit() {
            Some(u) => u,
            None => {
                fallback_used = true;
                fallback_axis(event)
            }
        };
        if (next_axis - axis).norm() <= AXIS_TOLERANCE || iterations >= max_iter {
            break;
        }
        iterations += 1;
        axis = next_axis;
        let next: Partition = split_by_axis(event, &axis);
        if next == partition {
            break;
        }
        partition = next;
        jet = partition.jet_momentum(event)?;
        history.push(jet.norm());
    }

    Ok(IterativeResult {
        result: ThrustResult::from_partition(event, &partition)?,
        iterations,
        fallback_used,
        momentum_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{generate_dijet_event, GeneratorConfig};
    use crate::shapes::thrust_exact;

    #[test]
    fn exact_axis_is_a_fixed_point() {
        let cfg = GeneratorConfig::default();
        for id in 0..20 {
            let e = generate_dijet_event(&cfg, id).unwrap();
            let ex = thrust_exact(&e).unwrap();
            let it = iterative_thrust(&e, &ex.axis, 100).unwrap();
            assert_eq!(it.iterations, 0, "event {id}");
            assert_eq!(it.result.partition, ex.partition);
        }
    }

    #[test]
    fn pair_converges_in_one_update() {
        let e = Event::new(
            0,
            [Momentum3::new(0.0, 0.0, 2.0), Momentum3::new(0.0, 0.0, -2.0)],
        )
        .unwrap();
        let it = iterative_thrust(&e, &Momentum3::new(0.3, 0.1, -0.5), 10).unwrap();
        assert_eq!(it.iterations, 1);
        assert!((it.result.thrust - 1.0).abs() < 1e-15);
    }

    #[test]
    fn history_is_monotone_and_bounded_by_exact() {
        let cfg = GeneratorConfig {
            transverse_smear: 0.7,
            ..Default::default()
        };
        for id in 0..40 {
            let e = generate_dijet_event(&cfg, id).unwrap();
            let seed = Momentum3::new(1.0, 0.0, 0.0);
            let it = iterative_thrust(&e, &seed, default_max_iter(e.len())).unwrap();
            for w in it.momentum_history.windows(2) {
                assert!(w[1] > w[0], "event {id}: {:?}", it.momentum_history);
            }
            let ex = thrust_exact(&e).unwrap();
            assert!(it.result.thrust <= ex.thrust * (1.0 + 1e-12));
            assert!(it.iterations <= default_max_iter(e.len()));
        }
    }

    #[test]
    fn zero_seed_and_zero_budget_are_rejected() {
        let e = generate_dijet_event(&GeneratorConfig::default(), 0).unwrap();
        assert!(iterative_thrust(&e, &Momentum3::ZERO, 5).is_err());
        assert!(iterative_thrust(&e, &Momentum3::new(1.0, 0.0, 0.0), 0).is_err());
    }

    #[test]
    fn perpendicular_seed_uses_fallback() {
        // Every particle lies in the x-y plane, so a z seed selects nobody.
        let e = Event::new(
            0,
            [
                Momentum3::new(3.0, 0.0, 0.0),
                Momentum3::new(-1.0, 1.0, 0.0),
                Momentum3::new(-2.0, -1.0, 0.0),
            ],
        )
        .unwrap();
        let it = iterative_thrust(&e, &Momentum3::new(0.0, 0.0, 1.0), 10).unwrap();
        assert!(it.fallback_used);
        assert!(it.result.thrust > 0.5);
    }
}
