//! Thrust methods behind one trait, looked up by name.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::embed::{chained_solve, hardware_chain_length};
use crate::error::{Error, Result};
use crate::events::Event;
use crate::qubo::{build_thrust_qubo, QuboProblem};
use crate::rng;
use crate::shapes::{
    default_max_iter, iterative_thrust, sphericity, thrust_brute_force, thrust_exact, Partition, BRUTE_FORCE_MAX,
};
use crate::solvers::{
    hybrid_seed_iterate, reverse_anneal_best_of, simulated_anneal, spvar, AnnealSchedule, QuboSampler, SolveResult,
    SolverConfig, SpvarConfig,
};

/// What a method hands back for one event.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub partition: Partition,
    /// Axis updates, for the iterative methods.
    pub iterations: Option<usize>,
    /// Mean fraction of broken chains, for the chained methods.
    pub break_rate: Option<f64>,
}

impl MethodOutcome {
    fn plain(partition: Partition) -> Self {
        Self {
            partition,
            iterations: None,
            break_rate: None,
        }
    }
}

pub trait ThrustMethod: Send + Sync {
    fn name(&self) -> &'static str;
    /// The full configuration in effect, defaults filled in.
    fn config(&self) -> serde_json::Value;
    /// Clusters one event. `seed` is already specific to the event.
    fn run(&self, event: &Event, seed: u64) -> Result<MethodOutcome>;
}

type Builder = fn(&serde_json::Value) -> Result<Box<dyn ThrustMethod>>;

const REGISTRY: &[(&str, Builder)] = &[
    ("exact", |_| Ok(Box::new(Exact))),
    ("brute_force", |_| Ok(Box::new(BruteForce))),
    ("sa", |v| Ok(Box::new(Sa(parse_config("sa", v, AnnealConfig::tuned_analog())?)))),
    ("sa_default", |v| {
        Ok(Box::new(Chained {
            name: "sa_default",
            config: parse_config("sa_default", v, ChainedConfig::default_analog())?,
        }))
    }),
    ("sa_tuned", |v| {
        Ok(Box::new(Chained {
            name: "sa_tuned",
            config: parse_config("sa_tuned", v, ChainedConfig::tuned_analog())?,
        }))
    }),
    ("chained", |v| {
        Ok(Box::new(Chained {
            name: "chained",
            config: parse_config("chained", v, ChainedConfig::default_analog())?,
        }))
    }),
    ("reverse", |v| Ok(Box::new(Reverse(parse_config("reverse", v, ReverseConfig::default())?)))),
    ("spvar", |v| Ok(Box::new(Spvar(parse_config("spvar", v, SpvarMethodConfig::default())?)))),
    ("hybrid_seed_iterate", |v| {
        Ok(Box::new(HybridSeedIterate(parse_config(
            "hybrid_seed_iterate",
            v,
            ChainedConfig::default_analog(),
        )?)))
    }),
    ("sphericity_iterate", |v| {
        Ok(Box::new(SphericityIterate(parse_config(
            "sphericity_iterate",
            v,
            SphericityConfig::default(),
        )?)))
    }),
];

pub fn method_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|(n, _)| *n).collect()
}

/// Builds the method registered under `name`. `config` may be `null` or a
/// partial object; missing fields take the method's defaults and unknown
/// fields are rejected.
pub fn build_method(name: &str, config: &serde_json::Value) -> Result<Box<dyn ThrustMethod>> {
    let (_, build) = REGISTRY
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownMethod(name.to_string()))?;
    build(config)
}

fn parse_config<T: DeserializeOwned + Serialize>(method: &str, value: &serde_json::Value, defaults: T) -> Result<T> {
    let mut merged = serde_json::to_value(&defaults)?;
    match value {
        serde_json::Value::Null => {}
        serde_json::Value::Object(overrides) => {
            let base = merged.as_object_mut().expect("configs serialize to objects");
            for (k, v) in overrides {
                if !base.contains_key(k) {
                    return Err(Error::InvalidConfig(format!("{method}: unknown field `{k}`")));
                }
                base.insert(k.clone(), v.clone());
            }
        }
        other => return Err(Error::InvalidConfig(format!("{method}: config must be an object, got {other}"))),
    }
    serde_json::from_value(merged).map_err(|e| Error::InvalidConfig(format!("{method}: {e}")))
}

/// The thrust QUBO rescaled so its largest coefficient is 1.
pub fn scaled_thrust_qubo(event: &Event) -> Result<QuboProblem> {
    build_thrust_qubo(event).auto_scale()
}

/// Forward-annealing budget in schedule time units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub anneal_time: f64,
    pub num_reads: usize,
    pub sweeps_per_unit_time: usize,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl AnnealConfig {
    /// 20 time units, 100 reads.
    pub fn default_analog() -> Self {
        let s = SolverConfig::default();
        Self {
            anneal_time: 20.0,
            num_reads: 100,
            sweeps_per_unit_time: s.sweeps_per_unit_time,
            beta_min: s.beta_min,
            beta_max: s.beta_max,
        }
    }

    /// 100 time units, 1000 reads.
    pub fn tuned_analog() -> Self {
        Self {
            anneal_time: 100.0,
            num_reads: 1000,
            ..Self::default_analog()
        }
    }

    pub fn schedule(&self) -> Result<AnnealSchedule> {
        AnnealSchedule::forward(self.anneal_time)
    }

    pub fn solver(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            num_reads: self.num_reads,
            sweeps_per_unit_time: self.sweeps_per_unit_time,
            beta_min: self.beta_min,
            beta_max: self.beta_max,
            rng_seed: seed,
        }
    }
}

/// Annealing on the chain-embedded problem, the stand-in for hardware runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainedConfig {
    pub rcs: f64,
    /// `None` picks the hardware-like length for the problem size.
    pub chain_length: Option<usize>,
    pub anneal_time: f64,
    pub num_reads: usize,
    pub sweeps_per_unit_time: usize,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl ChainedConfig {
    /// rcs 1.0, 20 time units, 100 reads.
    pub fn default_analog() -> Self {
        Self::from_anneal(1.0, AnnealConfig::default_analog())
    }

    /// rcs 0.2, 100 time units, 1000 reads.
    pub fn tuned_analog() -> Self {
        Self::from_anneal(0.2, AnnealConfig::tuned_analog())
    }

    fn from_anneal(rcs: f64, a: AnnealConfig) -> Self {
        Self {
            rcs,
            chain_length: None,
            anneal_time: a.anneal_time,
            num_reads: a.num_reads,
            sweeps_per_unit_time: a.sweeps_per_unit_time,
            beta_min: a.beta_min,
            beta_max: a.beta_max,
        }
    }

    pub fn anneal(&self) -> AnnealConfig {
        AnnealConfig {
            anneal_time: self.anneal_time,
            num_reads: self.num_reads,
            sweeps_per_unit_time: self.sweeps_per_unit_time,
            beta_min: self.beta_min,
            beta_max: self.beta_max,
        }
    }

    pub fn chain_length_for(&self, n_logical: usize) -> usize {
        self.chain_length.unwrap_or_else(|| hardware_chain_length(n_logical))
    }

    /// One chained solve of `qubo`; returns the result and its break rate.
    pub fn solve(&self, qubo: &QuboProblem, seed: u64) -> Result<(SolveResult, f64)> {
        let anneal = self.anneal();
        let r = chained_solve(
            qubo,
            self.rcs,
            &anneal.schedule()?,
            &anneal.solver(seed),
            self.chain_length_for(qubo.n()),
        )?;
        Ok((r.solve, r.break_rate))
    }
}

impl QuboSampler for ChainedConfig {
    fn name(&self) -> &str {
        "chained"
    }

    fn sample(&self, qubo: &QuboProblem, seed: u64) -> Result<SolveResult> {
        self.solve(qubo, seed).map(|(r, _)| r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseConfig {
    /// Turning points `t` of the `{[0, 1], [t, s_turn], [duration, 1]}` schedules.
    pub turn_times: Vec<f64>,
    pub s_turn: f64,
    pub anneal_time: f64,
    pub num_reads: usize,
    pub sweeps_per_unit_time: usize,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for ReverseConfig {
    fn default() -> Self {
        let a = AnnealConfig::default_analog();
        Self {
            turn_times: vec![5.0, 10.0, 15.0],
            s_turn: 0.5,
            anneal_time: a.anneal_time,
            num_reads: a.num_reads,
            sweeps_per_unit_time: a.sweeps_per_unit_time,
            beta_min: a.beta_min,
            beta_max: a.beta_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpvarMethodConfig {
    pub num_starts: usize,
    pub fixing_threshold: f64,
    pub elite_threshold: f64,
    /// Samples of the auto-scaled problem with objective below
    /// `sum |p| / floor_divisor` are dropped. `None` keeps every sample.
    pub floor_divisor: Option<f64>,
    pub inner: ChainedConfig,
}

impl Default for SpvarMethodConfig {
    fn default() -> Self {
        let s = SpvarConfig::default();
        Self {
            num_starts: s.num_starts,
            fixing_threshold: s.fixing_threshold,
            elite_threshold: s.elite_threshold,
            floor_divisor: Some(6.0),
            inner: ChainedConfig::default_analog(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericityConfig {
    pub r: u32,
}

impl Default for SphericityConfig {
    fn default() -> Self {
        Self { r: 1 }
    }
}

struct Exact;

impl ThrustMethod for Exact {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn config(&self) -> serde_json::Value {
        serde_json::json!({})
    }

    fn run(&self, event: &Event, _seed: u64) -> Result<MethodOutcome> {
        Ok(MethodOutcome::plain(thrust_exact(event)?.partition))
    }
}

struct BruteForce;

impl ThrustMethod for BruteForce {
    fn name(&self) -> &'static str {
        "brute_force"
    }

    fn config(&self) -> serde_json::Value {
        serde_json::json!({ "max_particles": BRUTE_FORCE_MAX })
    }

    fn run(&self, event: &Event, _seed: u64) -> Result<MethodOutcome> {
        Ok(MethodOutcome::plain(thrust_brute_force(event)?.partition))
    }
}

struct Sa(AnnealConfig);

impl ThrustMethod for Sa {
    fn name(&self) -> &'static str {
        "sa"
    }

    fn config(&self) -> serde_json::Value {
        serde_json::to_value(&self.0).unwrap_or_default()
    }

    fn run(&self, event: &Event, seed: u64) -> Result<MethodOutcome> {
        let r = simulated_anneal(&scaled_thrust_qubo(event)?, &self.0.schedule()?, &self.0.solver(seed))?;
        Ok(MethodOutcome::plain(r.best_assignment))
    }
}

struct Chained {
    name: &'static str,
    config: ChainedConfig,
}

impl ThrustMethod for Chained {
    fn name(&self) -> &'static str {
        self.name
    }

    fn config(&self) -> serde_json::Value {
        serde_json::to_value(&self.config).unwrap_or_default()
    }

    fn run(&self, event: &Event, seed: u64) -> Result<MethodOutcome> {
        let (r, break_rate) = self.config.solve(&build_thrust_qubo(event), seed)?;
        Ok(MethodOutcome {
            partition: r.best_assignment,
            iterations: None,
            break_rate: Some(break_rate),
        })
    }
}

struct Reverse(ReverseConfig);

impl ThrustMethod for Reverse {
    fn name(&self) -> &'static str {
        "reverse"
    }

    fn config(&self) -> serde_json::Value {
        serde_json::to_value(&self.0).unwrap_or_default()
    }

    fn run(&self, event: &Event, seed: u64) -> Result<MethodOutcome> {
        let c = &self.0;
        let schedules = c
            .turn_times
            .iter()
            .map(|&t| AnnealSchedule::reverse(t, c.s_turn, c.anneal_time))
            .collect::<Result<Vec<_>>>()?;
        let qubo = scaled_thrust_qubo(event)?;
        // The first read starts from a random assignment.
        let mut init_rng = rng::stream(seed, &[u64::MAX]);
        let initial = Partition::from_fn(qubo.n(), |_| rand::Rng::random::<bool>(&mut init_rng));
        let solver = SolverConfig {
            num_reads: c.num_reads,
            sweeps_per_unit_time: c.sweeps_per_unit_time,
            beta_min: c.beta_min,
            beta_max: c.beta_max,
            rng_seed: seed,
        };
        let r = reverse_anneal_best_of(&qubo, &initial, &schedules, &solver)?;
        Ok(MethodOutcome::plain(r.best_assignment))
    }
}

struct Spvar(SpvarMethodConfig);

impl ThrustMethod for Spvar {
    fn name(&self) -> &'static str {
        "spvar"
    }

    fn config(&self) -> serde_json::Value {
        serde_json::to_value(&self.0).unwrap_or_default()
    }

    fn run(&self, event: &Event, seed: u64) -> Result<MethodOutcome> {
        let c = &self.0;
        let config = SpvarConfig {
            num_starts: c.num_starts,
            fixing_threshold: c.fixing_threshold,
            elite_threshold: c.elite_threshold,
            energy_floor: c.floor_divisor.map(|d| event.scalar_sum() / d),
        };
        let out = spvar(&scaled_thrust_qubo(event)?, &config, &c.inner, seed)?;
        Ok(MethodOutcome::plain(out.result.best_assignment))
    }
}

struct HybridSeedIterate(ChainedConfig);

impl ThrustMethod for HybridSeedIterate {
    fn name(&self) -> &'static str {
        "hybrid_seed_iterate"
    }

    fn config(&self) -> serde_json::Value {
        serde_json::to_value(&self.0).unwrap_or_default()
    }

    fn run(&self, event: &Event, seed: u64) -> Result<MethodOutcome> {
        let (solve, break_rate) = self.0.solve(&build_thrust_qubo(event), seed)?;
        let it = hybrid_seed_iterate(event, &solve)?;
        Ok(MethodOutcome {
            partition: it.result.partition,
            iterations: Some(it.iterations),
            break_rate: Some(break_rate),
        })
    }
}

struct SphericityIterate(SphericityConfig);

impl ThrustMethod for SphericityIterate {
    fn name(&self) -> &'static str {
        "sphericity_iterate"
    }

    fn config(&self) -> serde_json::Value {
        serde_json::to_value(&self.0).unwrap_or_default()
    }

    fn run(&self, event: &Event, _seed: u64) -> Result<MethodOutcome> {
        let s = sphericity(event, self.0.r)?;
        let it = iterative_thrust(event, &s.axis, default_max_iter(event.len()))?;
        Ok(MethodOutcome {
            partition: it.result.partition,
            iterations: Some(it.iterations),
            break_rate: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{generate_dijet_event, GeneratorConfig};
    use crate::shapes::thrust_of_partition;

    #[test]
    fn every_name_builds_with_defaults() {
        for name in method_names() {
            let m = build_method(name, &serde_json::Value::Null).unwrap();
            assert_eq!(m.name(), name);
            assert!(m.config().is_object());
        }
        assert!(matches!(
            build_method("nope", &serde_json::Value::Null),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn partial_configs_merge_and_unknown_fields_fail() {
        let m = build_method("chained", &serde_json::json!({ "rcs": 0.5, "num_reads": 3 })).unwrap();
        assert_eq!(m.config()["rcs"], 0.5);
        assert_eq!(m.config()["anneal_time"], 20.0);
        assert!(build_method("chained", &serde_json::json!({ "rsc": 0.5 })).is_err());
        assert!(build_method("sa", &serde_json::json!([1])).is_err());
    }

    #[test]
    fn cheap_methods_run() {
        let cfg = GeneratorConfig {
            n_min: 8,
            n_max: 12,
            ..Default::default()
        };
        let e = generate_dijet_event(&cfg, 3).unwrap();
        let exact = thrust_exact(&e).unwrap().thrust;
        let small = serde_json::json!({ "num_reads": 5, "anneal_time": 2.0 });
        for (name, cfg) in [
            ("exact", serde_json::Value::Null),
            ("brute_force", serde_json::Value::Null),
            ("sa", small.clone()),
            ("sa_default", small.clone()),
            ("chained", small.clone()),
            ("reverse", serde_json::json!({ "num_reads": 5 })),
            ("hybrid_seed_iterate", small.clone()),
            ("sphericity_iterate", serde_json::Value::Null),
        ] {
            let m = build_method(name, &cfg).unwrap();
            let out = m.run(&e, 11).unwrap();
            let t = thrust_of_partition(&e, &out.partition).unwrap();
            assert!(t <= exact + 1e-12, "{name}");
            assert_eq!(out, m.run(&e, 11).unwrap(), "{name} not deterministic");
        }
    }
}
