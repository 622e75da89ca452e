//! Two-jet hemisphere clustering of electron-positron events by thrust.
//!
//! The crate is organised bottom-up:
//!
//! - [`events`]: momenta, toy dijet generation, the plain-text event format.
//! - [`shapes`]: thrust (exact, brute force, from an axis or a partition),
//!   the iterative axis refinement and linearised sphericity.
//! - [`qubo`]: the thrust and SingleCone QUBO matrices, auto-scaling and the
//!   Ising change of variables.
//! - [`solvers`]: exhaustive search, simulated annealing driven by `[t, s]`
//!   schedules, reverse annealing, multi-start sample-persistence variable
//!   reduction and the seed-then-iterate pipeline.
//! - [`embed`]: qubit chains on a sparse hardware graph, chain strength and
//!   majority-vote unembedding.
//! - [`bench`]: named thrust methods behind a registry, dataset runs, the
//!   parameter scans and CSV/JSON reporting.

pub mod bench;
pub mod cli;
pub mod embed;
pub mod error;
pub mod events;
pub mod qubo;
pub mod rng;
pub mod shapes;
pub mod solvers;

pub use error::{Error, Result};
pub use events::{Event, Momentum3, Particle};
pub use qubo::{IsingProblem, QuboProblem, Sense};
pub use shapes::{Partition, SphericityResult, ThrustResult};
