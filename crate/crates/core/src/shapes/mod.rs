//! Event shapes: thrust in its axis and partition forms, the iterative
//! hemisphere refinement, and sphericity.

mod iterative;
mod partition;
mod sphericity;
mod thrust;

pub use iterative::{default_max_iter, fallback_axis, iterative_thrust, IterativeResult};
pub use partition::Partition;
pub use sphericity::{sphericity, SphericityResult};
pub use thrust::{
    thrust_brute_force, thrust_exact, thrust_of_axis, thrust_of_partition, ThrustResult,
    BRUTE_FORCE_MAX,
};
