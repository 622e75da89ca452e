//! Chain embedding of fully connected problems onto a sparse hardware graph.
//!
//! Each logical variable becomes a path of physical spins held together by
//! ferromagnetic couplers of strength `acs = rcs * max |Q_ij|`. Each logical
//! pair talks through exactly one bridge coupler between their chains. After
//! sampling, chains are read back by majority vote.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{spins_to_bits, IsingProblem, QuboProblem};
use crate::shapes::Partition;
use crate::solvers::{sample_ising, AnnealSchedule, Provenance, QuboSampler, SolveResult, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardwareGraph {
    pub num_physical: usize,
    /// Unordered pairs stored as `(low, high)`.
    pub couplers: BTreeSet<(usize, usize)>,
}

impl HardwareGraph {
    pub fn new(num_physical: usize) -> Self {
        Self {
            num_physical,
            couplers: BTreeSet::new(),
        }
    }

    pub fn add_coupler(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::InvalidEmbedding(format!("self-loop on qubit {a}")));
        }
        if a >= self.num_physical || b >= self.num_physical {
            return Err(Error::InvalidEmbedding(format!("coupler ({a}, {b}) out of range")));
        }
        self.couplers.insert((a.min(b), a.max(b)));
        Ok(())
    }

    pub fn has_coupler(&self, a: usize, b: usize) -> bool {
        self.couplers.contains(&(a.min(b), a.max(b)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEmbedding {
    /// Physical qubits of each logical variable, in path order.
    pub chains: Vec<Vec<usize>>,
    /// Longest chain.
    pub chain_length: usize,
    /// Bridge coupler `(qubit in chain i, qubit in chain j)` for each `i < j`.
    pub inter_chain: BTreeMap<(usize, usize), (usize, usize)>,
}

impl ChainEmbedding {
    pub fn num_logical(&self) -> usize {
        self.chains.len()
    }

    pub fn num_physical(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    /// Couplers along the chains.
    pub fn chain_couplers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.chains.iter().flat_map(|c| c.windows(2).map(|w| (w[0], w[1])))
    }

    /// Checks disjointness and bridge completeness, and returns the hardware
    /// graph made of the chain paths plus the bridges.
    pub fn hardware_graph(&self) -> Result<HardwareGraph> {
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, chain) in self.chains.iter().enumerate() {
            if chain.is_empty() {
                return Err(Error::InvalidEmbedding(format!("chain {i} is empty")));
            }
            for &q in chain {
                if let Some(prev) = owner.insert(q, i) {
                    return Err(Error::InvalidEmbedding(format!(
                        "qubit {q} shared by chains {prev} and {i}"
                    )));
                }
            }
        }
        let num_physical = owner.keys().next_back().map_or(0, |m| m + 1);
        let mut graph = HardwareGraph::new(num_physical);
        for (a, b) in self.chain_couplers() {
            graph.add_coupler(a, b)?;
        }
        let n = self.num_logical();
        for i in 0..n {
            for j in (i + 1)..n {
                let &(a, b) = self.inter_chain.get(&(i, j)).ok_or_else(|| {
                    Error::InvalidEmbedding(format!("no bridge for logical pair ({i}, {j})"))
                })?;
                if owner.get(&a) != Some(&i) || owner.get(&b) != Some(&j) {
                    return Err(Error::InvalidEmbedding(format!(
                        "bridge ({a}, {b}) does not join chains {i} and {j}"
                    )));
                }
                graph.add_coupler(a, b)?;
            }
        }
        if self.inter_chain.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::InvalidEmbedding("unexpected extra bridges".into()));
        }
        Ok(graph)
    }

    /// Text form: `C <logical> <k>` followed by the chain's `k` qubits on the
    /// next line, then `B <i> <j> <phys_a> <phys_b>` per bridge.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (i, chain) in self.chains.iter().enumerate() {
            let _ = writeln!(out, "C {} {}", i, chain.len());
            let qs: Vec<String> = chain.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{}", qs.join(" "));
        }
        for (&(i, j), &(a, b)) in &self.inter_chain {
            let _ = writeln!(out, "B {i} {j} {a} {b}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<ChainEmbedding> {
        let mut tokens = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim_start().starts_with('#'))
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
            .peekable();
        let mut last_line = 1;
        let mut num = |what: &str, tokens: &mut std::iter::Peekable<_>| -> Result<usize> {
            let next: Option<(usize, &str)> = tokens.next();
            let (line, t) = next.ok_or_else(|| Error::Parse {
                line: last_line,
                msg: format!("unexpected end of file, expected {what}"),
            })?;
            last_line = line;
            t.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad {what} `{t}`"),
            })
        };
        let mut chains: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut inter_chain = BTreeMap::new();
        while let Some((line, tag)) = tokens.next() {
            match tag {
                "C" => {
                    let i = num("logical index", &mut tokens)?;
                    let k = num("chain size", &mut tokens)?;
                    let chain = (0..k)
                        .map(|_| num("physical index", &mut tokens))
                        .collect::<Result<Vec<_>>>()?;
                    if chains.insert(i, chain).is_some() {
                        return Err(Error::Parse {
                            line,
                            msg: format!("chain {i} listed twice"),
                        });
                    }
                }
                "B" => {
                    let i = num("logical index", &mut tokens)?;
                    let j = num("logical index", &mut tokens)?;
                    let a = num("physical index", &mut tokens)?;
                    let b = num("physical index", &mut tokens)?;
                    let (key, val) = if i < j { ((i, j), (a, b)) } else { ((j, i), (b, a)) };
                    if inter_chain.insert(key, val).is_some() {
                        return Err(Error::Parse {
                            line,
                            msg: format!("bridge ({i}, {j}) listed twice"),
                        });
                    }
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected `C` or `B`, got `{other}`"),
                    })
                }
            }
        }
        let n = chains.len();
        if chains.keys().copied().ne(0..n) {
            return Err(Error::InvalidEmbedding("chain indices must be 0..n".into()));
        }
        let chains: Vec<Vec<usize>> = chains.into_values().collect();
        let emb = ChainEmbedding {
            chain_length: chains.iter().map(Vec::len).max().unwrap_or(0),
            chains,
            inter_chain,
        };
        emb.hardware_graph()?;
        Ok(emb)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ChainEmbedding> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Chain strength; `acs / max |Q_ij| = rcs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub rcs: f64,
    pub acs: f64,
}

impl ChainConfig {
    pub fn new(rcs: f64, max_abs_q: f64) -> Result<Self> {
        if !(rcs > 0.0 && rcs.is_finite()) {
            return Err(Error::InvalidConfig(format!("rcs must be positive, got {rcs}")));
        }
        Ok(Self {
            rcs,
            acs: rcs * max_abs_q,
        })
    }
}

/// Chain length a clique of `n_logical` variables needs on the reference
/// hardware: 7 at 124 variables, with physical qubits growing as
/// `n^1.82`.
pub fn hardware_chain_length(n_logical: usize) -> usize {
    ((7.0 * (n_logical as f64 / 124.0).powf(0.82)).ceil() as usize).max(1)
}

/// `n_logical` paths of `chain_length` qubits plus one bridge per logical
/// pair. Bridge endpoints walk round-robin along each chain.
pub fn synth_clique_embedding(n_logical: usize, chain_length: usize) -> Result<(HardwareGraph, ChainEmbedding)> {
    if n_logical == 0 || chain_length == 0 {
        return Err(Error::InvalidEmbedding(format!(
            "need n_logical >= 1 and chain_length >= 1, got {n_logical} and {chain_length}"
        )));
    }
    let chains: Vec<Vec<usize>> = (0..n_logical)
        .map(|i| (i * chain_length..(i + 1) * chain_length).collect())
        .collect();
    let mut next_slot = vec![0usize; n_logical];
    let mut inter_chain = BTreeMap::new();
    for i in 0..n_logical {
        for j in (i + 1)..n_logical {
            let a = chains[i][next_slot[i] % chain_length];
            let b = chains[j][next_slot[j] % chain_length];
            next_slot[i] += 1;
            next_slot[j] += 1;
            inter_chain.insert((i, j), (a, b));
        }
    }
    let emb = ChainEmbedding {
        chains,
        chain_length,
        inter_chain,
    };
    let graph = emb.hardware_graph()?;
    Ok((graph, emb))
}

/// Places a logical Ising problem on the hardware. Fields are split evenly
/// along each chain, logical couplings sit on the bridges and every chain
/// coupler is `-acs`. The offset absorbs the chain couplers' aligned energy,
/// so a chain-consistent state has exactly its logical energy.
pub fn embed_problem(ising: &IsingProblem, embedding: &ChainEmbedding, chain: &ChainConfig) -> Result<IsingProblem> {
    if ising.n() != embedding.num_logical() {
        return Err(Error::LengthMismatch {
            expected: embedding.num_logical(),
            got: ising.n(),
        });
    }
    let graph = embedding.hardware_graph()?;
    let mut h = vec![0.0; graph.num_physical];
    for (i, qs) in embedding.chains.iter().enumerate() {
        let share = ising.h[i] / qs.len() as f64;
        for &q in qs {
            h[q] = share;
        }
    }
    let mut j = BTreeMap::new();
    for (&(a, b), &v) in &ising.j {
        let &(pa, pb) = embedding.inter_chain.get(&(a, b)).ok_or_else(|| {
            Error::InvalidEmbedding(format!("no bridge for coupling ({a}, {b})"))
        })?;
        j.insert((pa.min(pb), pa.max(pb)), v);
    }
    let mut chain_links = 0usize;
    for (a, b) in embedding.chain_couplers() {
        j.insert((a.min(b), a.max(b)), -chain.acs);
        chain_links += 1;
    }
    Ok(IsingProblem {
        h,
        j,
        offset: ising.offset + chain.acs * chain_links as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnembedPolicy {
    MajorityVote,
    Discard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnembedReport {
    pub logical_sample: Partition,
    pub broken_chains: Vec<usize>,
    pub resolution: UnembedPolicy,
    /// False when the discard policy met a broken chain.
    pub valid: bool,
}

/// Reads logical values off physical spins. Broken chains go to the majority
/// value (ties to 0) or, under [`UnembedPolicy::Discard`], invalidate the
/// sample.
pub fn unembed(physical: &[i8], embedding: &ChainEmbedding, policy: UnembedPolicy) -> UnembedReport {
    let mut broken = Vec::new();
    let bits: Vec<bool> = embedding
        .chains
        .iter()
        .enumerate()
        .map(|(i, qs)| {
            let up = qs.iter().filter(|&&q| physical[q] > 0).count();
            if up != 0 && up != qs.len() {
                broken.push(i);
            }
            2 * up > qs.len()
        })
        .collect();
    let valid = broken.is_empty() || policy == UnembedPolicy::MajorityVote;
    UnembedReport {
        logical_sample: Partition::new(bits),
        broken_chains: broken,
        resolution: policy,
        valid,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainedResult {
    /// Energies refer to the problem passed in, not its scaled copy.
    pub solve: SolveResult,
    pub chain: ChainConfig,
    pub broken_per_read: Vec<usize>,
    /// Mean fraction of broken chains per read.
    pub break_rate: f64,
    pub num_physical: usize,
}

/// auto-scale -> Ising -> synthetic clique embedding -> anneal the physical
/// problem -> majority-vote every read.
pub fn chained_solve(
    qubo: &QuboProblem,
    rcs: f64,
    schedule: &AnnealSchedule,
    config: &SolverConfig,
    chain_length: usize,
) -> Result<ChainedResult> {
    let (_, embedding) = synth_clique_embedding(qubo.n().max(1), chain_length)?;
    chained_solve_with(qubo, rcs, &embedding, schedule, config)
}

pub fn chained_solve_with(
    qubo: &QuboProblem,
    rcs: f64,
    embedding: &ChainEmbedding,
    schedule: &AnnealSchedule,
    config: &SolverConfig,
) -> Result<ChainedResult> {
    let started = Instant::now();
    let scaled = qubo.auto_scale().unwrap_or_else(|_| qubo.clone());
    let chain = ChainConfig::new(rcs, scaled.max_abs())?;
    let physical = embed_problem(&scaled.to_ising(), embedding, &chain)?;
    let raw = sample_ising(&physical, schedule, config)?;

    let mut samples = Vec::with_capacity(raw.states.len());
    let mut energies = Vec::with_capacity(raw.states.len());
    let mut broken_per_read = Vec::with_capacity(raw.states.len());
    for state in &raw.states {
        let report = unembed(state, embedding, UnembedPolicy::MajorityVote);
        energies.push(qubo.energy_bits(report.logical_sample.bits()));
        broken_per_read.push(report.broken_chains.len());
        samples.push(report.logical_sample);
    }
    let n = embedding.num_logical().max(1) as f64;
    let break_rate = broken_per_read.iter().map(|&b| b as f64 / n).sum::<f64>() / broken_per_read.len() as f64;
    let solve = SolveResult::from_reads(
        samples,
        energies,
        raw.sweeps_per_read * config.num_reads,
        started.elapsed().as_secs_f64(),
        Provenance::new(
            "chained_solve",
            serde_json::json!({
                "rcs": rcs,
                "chain_length": embedding.chain_length,
                "schedule": schedule,
                "solver": config,
            }),
        ),
    );
    Ok(ChainedResult {
        solve,
        chain,
        broken_per_read,
        break_rate,
        num_physical: physical.n(),
    })
}

/// [`chained_solve`] as a [`QuboSampler`].
#[derive(Debug, Clone)]
pub struct ChainedAnnealer {
    pub rcs: f64,
    pub chain_length: usize,
    pub schedule: AnnealSchedule,
    pub config: SolverConfig,
}

impl QuboSampler for ChainedAnnealer {
    fn name(&self) -> &str {
        "chained_solve"
    }

    fn sample(&self, qubo: &QuboProblem, seed: u64) -> Result<SolveResult> {
        chained_solve(qubo, self.rcs, &self.schedule, &self.config.with_seed(seed), self.chain_length)
            .map(|r| r.solve)
    }
}

/// Physical bits for a logical assignment with every chain aligned.
pub fn embed_state(logical: &Partition, embedding: &ChainEmbedding) -> Vec<i8> {
    let mut phys = vec![-1i8; embedding.num_physical()];
    for (i, qs) in embedding.chains.iter().enumerate() {
        for &q in qs {
            phys[q] = if logical.get(i) { 1 } else { -1 };
        }
    }
    phys
}

/// Logical bits of an aligned physical state (first qubit of each chain).
pub fn chain_heads(physical: &[i8], embedding: &ChainEmbedding) -> Partition {
    Partition::new(spins_to_bits(
        &embedding.chains.iter().map(|c| physical[c[0]]).collect::<Vec<_>>(),
    ))
}
