//! QUBO construction for thrust and SingleCone, objective evaluation,
//! auto-scaling, variable fixing and the Ising change of variables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::Event;
use crate::shapes::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// Multiplier taking objective values to minimisation energies.
    pub fn energy_sign(self) -> f64 {
        match self {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        }
    }
}

/// Dense symmetric QUBO `sum_ij Q_ij x_i x_j` over `x in {0,1}^n`.
///
/// `scale_factor` records how far the matrix has been divided down, so that
/// `objective_original = objective_scaled * scale_factor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboProblem {
    n: usize,
    q: Vec<f64>,
    pub sense: Sense,
    pub scale_factor: f64,
}

const SYMMETRY_TOLERANCE: f64 = 1e-12;

impl QuboProblem {
    /// `q` is row-major `n x n` and must be symmetric.
    pub fn new(n: usize, q: Vec<f64>, sense: Sense) -> Result<Self> {
        if q.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: q.len(),
            });
        }
        let scale = q.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                if (q[i * n + j] - q[j * n + i]).abs() > SYMMETRY_TOLERANCE * scale {
                    return Err(Error::InvalidConfig(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            q,
            sense,
            scale_factor: 1.0,
        })
    }

    pub fn from_fn(n: usize, sense: Sense, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                q[i * n + j] = v;
                q[j * n + i] = v;
            }
        }
        Self {
            n,
            q,
            sense,
            scale_factor: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.q
    }

    pub fn max_abs(&self) -> f64 {
        self.q.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `sum_ij Q_ij x_i x_j`.
    pub fn objective(&self, x: &Partition) -> Result<f64> {
        x.check_len(self.n)?;
        Ok(self.objective_bits(x.bits()))
    }

    pub(crate) fn objective_bits(&self, x: &[bool]) -> f64 {
        let ones: Vec<usize> = (0..self.n).filter(|&i| x[i]).collect();
        let mut total = 0.0;
        for &i in &ones {
            let row = &self.q[i * self.n..(i + 1) * self.n];
            total += ones.iter().map(|&j| row[j]).sum::<f64>();
        }
        total
    }

    /// Objective in the minimisation convention used by every solver.
    pub fn energy(&self, x: &Partition) -> Result<f64> {
        Ok(self.sense.energy_sign() * self.objective(x)?)
    }

    pub(crate) fn energy_bits(&self, x: &[bool]) -> f64 {
        self.sense.energy_sign() * self.objective_bits(x)
    }

    /// Divides every coefficient by `max |Q_ij|`.
    pub fn auto_scale(&self) -> Result<QuboProblem> {
        let m = self.max_abs();
        if m == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        Ok(QuboProblem {
            n: self.n,
            q: self.q.iter().map(|v| v / m).collect(),
            sense: self.sense,
            scale_factor: self.scale_factor * m,
        })
    }

    /// Substitutes fixed values into the problem. The residual problem acts
    /// on the free variables in increasing index order; linear terms from
    /// the substitution land on its diagonal (`x^2 = x`).
    pub fn fix_variables(&self, fixed: &BTreeMap<usize, bool>) -> Result<ReducedQubo> {
        if let Some((&k, _)) = fixed.iter().find(|(&k, _)| k >= self.n) {
            return Err(Error::InvalidConfig(format!("fixed index {k} out of range")));
        }
        let free: Vec<usize> = (0..self.n).filter(|i| !fixed.contains_key(i)).collect();
        let ones: Vec<usize> = fixed.iter().filter(|(_, &v)| v).map(|(&k, _)| k).collect();
        let constant: f64 = ones
            .iter()
            .map(|&f| ones.iter().map(|&g| self.get(f, g)).sum::<f64>())
            .sum();
        let m = free.len();
        let mut q = vec![0.0; m * m];
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                q[a * m + b] = self.get(i, j);
            }
            q[a * m + a] += 2.0 * ones.iter().map(|&f| self.get(i, f)).sum::<f64>();
        }
        Ok(ReducedQubo {
            problem: QuboProblem {
                n: m,
                q,
                sense: self.sense,
                scale_factor: self.scale_factor,
            },
            constant,
            free,
            fixed: fixed.clone(),
        })
    }

    /// Ising form of the minimisation energy under `x = (1 + s) / 2`.
    pub fn to_ising(&self) -> IsingProblem {
        let n = self.n;
        let sign = self.sense.energy_sign();
        let w = |i: usize, j: usize| sign * self.get(i, j);
        let mut h = vec![0.0; n];
        let mut couplings = BTreeMap::new();
        let mut offset = 0.0;
        for i in 0..n {
            h[i] += w(i, i) / 2.0;
            offset += w(i, i) / 2.0;
            for j in (i + 1)..n {
                let wij = w(i, j);
                if wij == 0.0 {
                    continue;
                }
                h[i] += wij / 2.0;
                h[j] += wij / 2.0;
                offset += wij / 2.0;
                couplings.insert((i, j), wij / 2.0);
            }
        }
        IsingProblem {
            h,
            j: couplings,
            offset,
        }
    }

    /// Text export: `Q <n>` then one `i j value` line per upper-triangle
    /// entry, diagonal included.
    pub fn to_export_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Q {}", self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let _ = writeln!(out, "{} {} {}", i, j, self.get(i, j));
            }
        }
        out
    }

    pub fn parse_export(text: &str, sense: Sense) -> Result<QuboProblem> {
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty QUBO file".into()))?;
        let n: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["Q", n] => n.parse().map_err(|_| perr(hl, format!("bad size `{n}`")))?,
            _ => return Err(perr(hl, format!("expected `Q <n>`, got `{header}`"))),
        };
        let mut q = vec![0.0; n * n];
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [i, j, v] = toks.as_slice() else {
                return Err(perr(ln, format!("expected `i j value`, got `{line}`")));
            };
            let i: usize = i.parse().map_err(|_| perr(ln, format!("bad index `{i}`")))?;
            let j: usize = j.parse().map_err(|_| perr(ln, format!("bad index `{j}`")))?;
            let v: f64 = v.parse().map_err(|_| perr(ln, format!("bad value `{v}`")))?;
            if i >= n || j >= n {
                return Err(perr(ln, format!("index ({i}, {j}) out of range")));
            }
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
        QuboProblem::new(n, q, sense)
    }
}

/// Result of [`QuboProblem::fix_variables`].
#[derive(Debug, Clone)]
pub struct ReducedQubo {
    pub problem: QuboProblem,
    /// Objective contribution of the fixed variables alone.
    pub constant: f64,
    /// Original index of each residual variable.
    pub free: Vec<usize>,
    pub fixed: BTreeMap<usize, bool>,
}

impl ReducedQubo {
    /// Full-length assignment from a residual one.
    pub fn assemble(&self, residual: &[bool]) -> Partition {
        let n = self.free.len() + self.fixed.len();
        let mut x = vec![false; n];
        for (&k, &v) in &self.fixed {
            x[k] = v;
        }
        for (&k, &v) in self.free.iter().zip(residual) {
            x[k] = v;
        }
        Partition::new(x)
    }

    /// Minimisation energy of the full problem for a residual assignment.
    pub fn full_energy(&self, residual: &[bool]) -> f64 {
        self.problem.energy_bits(residual) + self.problem.sense.energy_sign() * self.constant
    }
}

/// `E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + offset` over `s in {-1,+1}^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingProblem {
    pub h: Vec<f64>,
    /// Couplings keyed by `(i, j)` with `i < j`.
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingProblem {
    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        let field: f64 = self.h.iter().zip(spins).map(|(h, &s)| h * s as f64).sum();
        let coupling: f64 = self
            .j
            .iter()
            .map(|(&(a, b), &v)| v * (spins[a] * spins[b]) as f64)
            .sum();
        field + coupling + self.offset
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.j.values().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Spins for a bit assignment (`true -> +1`).
pub fn bits_to_spins(x: &[bool]) -> Vec<i8> {
    x.iter().map(|&b| if b { 1 } else { -1 }).collect()
}

pub fn spins_to_bits(s: &[i8]) -> Vec<bool> {
    s.iter().map(|&v| v > 0).collect()
}

/// `Q_ij = p_i . p_j`, maximised.
pub fn build_thrust_qubo(event: &Event) -> QuboProblem {
    let p: Vec<_> = event.momenta().copied().collect();
    QuboProblem::from_fn(p.len(), Sense::Maximize, |i, j| p[i].dot(&p[j]))
}

/// SingleCone matrix `Q_ij = (p_i . p_j - E_i E_j cos R) / (1 - cos R)`.
pub fn build_singlecone_qubo(event: &Event, radius: f64) -> Result<QuboProblem> {
    let cos_r = radius.cos();
    let denom = 1.0 - cos_r;
    if !(radius > 0.0 && radius <= std::f64::consts::PI) || denom < 1e-12 {
        return Err(Error::DegenerateRadius(radius));
    }
    let parts = &event.particles;
    Ok(QuboProblem::from_fn(parts.len(), Sense::Maximize, |i, j| {
        let (a, b) = (&parts[i], &parts[j]);
        (a.momentum.dot(&b.momentum) - a.energy * b.energy * cos_r) / denom
    }))
}

/// Inverts `objective = |sum_i x_i p_i|^2` through the partition formula:
/// `T = 2 sqrt(objective) / sum_i |p_i|`. Expects an unscaled objective.
pub fn thrust_from_objective(event: &Event, objective: f64) -> Result<f64> {
    if objective < 0.0 {
        return Err(Error::NegativeObjective(objective));
    }
    let scale = event.scalar_sum();
    if scale <= 0.0 {
        return Err(Error::ZeroMomentum);
    }
    Ok(2.0 * objective.sqrt() / scale)
}
