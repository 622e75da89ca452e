use serde::{Deserialize, Serialize};

use super::iterative::fallback_axis;
use super::Partition;
use crate::error::{Error, Result};
use crate::events::{Event, Momentum3};

/// Largest multiplicity accepted by [`thrust_brute_force`].
pub const BRUTE_FORCE_MAX: usize = 20;

/// Relative width of the near-tie band when comparing `|P|^2` values.
const TIE_TOLERANCE: f64 = 1e-12;

/// `|v . p_k|` below this fraction of `|v| |p_k|` counts as lying in the plane.
const PLANE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThrustResult {
    pub thrust: f64,
    pub one_minus_t: f64,
    /// Unit vector along the jet momentum.
    pub axis: Momentum3,
    /// Canonical representative (particle 0 outside the jet).
    pub partition: Partition,
    /// `sum_i x_i p_i` for the reported partition.
    pub jet_momentum: Momentum3,
}

impl ThrustResult {
    /// Evaluates a partition. The stored partition is canonicalised; when the
    /// jet momentum vanishes the axis falls back to the hardest particle.
    pub fn from_partition(event: &Event, partition: &Partition) -> Result<Self> {
        let partition = partition.canonical();
        let jet = partition.jet_momentum(event)?;
        let scale = event.scalar_sum();
        if scale <= 0.0 {
            return Err(Error::ZeroMomentum);
        }
        let thrust = 2.0 * jet.norm() / scale;
        let axis = jet.unit().unwrap_or_else(|| fallback_axis(event));
        Ok(Self {
            thrust,
            one_minus_t: 1.0 - thrust,
            axis,
            partition,
            jet_momentum: jet,
        })
    }
}

/// `T(x) = 2 |sum_i x_i p_i| / sum_i |p_i|`.
pub fn thrust_of_partition(event: &Event, partition: &Partition) -> Result<f64> {
    let jet = partition.jet_momentum(event)?;
    let scale = event.scalar_sum();
    if scale <= 0.0 {
        return Err(Error::ZeroMomentum);
    }
    Ok(2.0 * jet.norm() / scale)
}

/// `T(n) = sum_i |n . p_i| / sum_i |p_i|` together with the hemisphere it
/// induces (`x_i = 1` iff `n . p_i > 0`; exact zeros go to 0).
pub fn thrust_of_axis(event: &Event, axis: &Momentum3) -> Result<(f64, Partition)> {
    let n = axis.unit().ok_or(Error::ZeroAxis)?;
    let scale = event.scalar_sum();
    if scale <= 0.0 {
        return Err(Error::ZeroMomentum);
    }
    let proj: f64 = event.momenta().map(|p| n.dot(p).abs()).sum();
    Ok((proj / scale, split_by_axis(event, &n)))
}

pub(crate) fn split_by_axis(event: &Event, n: &Momentum3) -> Partition {
    Partition::new(event.momenta().map(|p| n.dot(p) > 0.0).collect())
}

/// The partition form of thrust equals the axis form only when the momenta
/// sum to zero, so the partition searches refuse anything else.
fn check_event(event: &Event) -> Result<()> {
    let n = event.len();
    if n < 2 {
        return Err(Error::TooFewParticles { id: event.id, n });
    }
    if event.scalar_sum() <= 0.0 {
        return Err(Error::ZeroMomentum);
    }
    if !event.is_balanced() {
        return Err(Error::Unbalanced {
            id: event.id,
            net: event.net_momentum().norm(),
        });
    }
    Ok(())
}

/// Running maximum of `|P|^2` with a deterministic tie-break: among values
/// within [`TIE_TOLERANCE`] of the best, the lexicographically smallest
/// canonical partition wins.
struct Best {
    value: f64,
    partition: Option<Partition>,
}

impl Best {
    fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            partition: None,
        }
    }

    fn wants(&self, value: f64) -> bool {
        value >= self.value - TIE_TOLERANCE * self.value.abs()
    }

    fn offer(&mut self, value: f64, make: impl FnOnce() -> Partition) {
        if !self.wants(value) {
            return;
        }
        let candidate = make().canonical();
        let strictly_better = value > self.value + TIE_TOLERANCE * self.value.abs();
        let replace = match &self.partition {
            None => true,
            Some(current) => strictly_better || candidate < *current,
        };
        if replace {
            self.partition = Some(candidate);
        }
        if value > self.value {
            self.value = value;
        }
    }
}

/// Exact thrust by enumerating hemisphere planes through pairs of particles.
///
/// For every non-collinear pair `(i, j)` the plane spanned by `p_i` and
/// `p_j` fixes the side of every particle off that plane; the particles on
/// it are then split by every line through the origin within the plane.
/// For a generic pair only `i` and `j` lie on the plane and the split reduces
/// to the four inclusion choices for them. Events whose momenta are all
/// collinear are split along their common line.
pub fn thrust_exact(event: &Event) -> Result<ThrustResult> {
    check_event(event)?;
    let p: Vec<Momentum3> = event.momenta().copied().collect();
    let n = p.len();
    let norms: Vec<f64> = p.iter().map(Momentum3::norm).collect();
    let mut best = Best::new();
    let mut base = vec![false; n];
    let mut on_plane: Vec<usize> = Vec::with_capacity(n);

    for i in 0..n {
        for j in (i + 1)..n {
            let v = p[i].cross(&p[j]);
            let vn = v.norm();
            if vn <= PLANE_TOLERANCE * norms[i] * norms[j] || vn == 0.0 {
                continue;
            }
            on_plane.clear();
            let mut base_sum = Momentum3::ZERO;
            for k in 0..n {
                let d = v.dot(&p[k]);
                if k == i || k == j || d.abs() <= PLANE_TOLERANCE * vn * norms[k] {
                    on_plane.push(k);
                    base[k] = false;
                } else {
                    base[k] = d > 0.0;
                    if base[k] {
                        base_sum += p[k];
                    }
                }
            }

            if on_plane.len() == 2 {
                for (take_i, take_j) in [(false, false), (true, false), (false, true), (true, true)] {
                    let mut sum = base_sum;
                    if take_i {
                        sum += p[i];
                    }
                    if take_j {
                        sum += p[j];
                    }
                    best.offer(sum.norm2(), || {
                        let mut x = base.clone();
                        x[i] = take_i;
                        x[j] = take_j;
                        Partition::new(x)
                    });
                }
                continue;
            }

            // Several particles share the plane: handle it once, from its
            // lowest-index particle and the first partner not collinear with it.
            let first_partner = on_plane
                .iter()
                .copied()
                .filter(|&k| k != i)
                .find(|&k| p[i].cross(&p[k]).norm() > PLANE_TOLERANCE * norms[i] * norms[k]);
            if on_plane[0] != i || first_partner != Some(j) {
                continue;
            }
            planar_candidates(&p, &norms, &v, &on_plane, &base, base_sum, &mut best);
        }
    }

    if best.partition.is_none() {
        // All momenta collinear.
        let axis = fallback_axis(event);
        let x = split_by_axis(event, &axis);
        best.offer(x.jet_momentum(event)?.norm2(), || x);
    }

    let partition = best.partition.expect("at least one candidate");
    ThrustResult::from_partition(event, &partition)
}

/// Candidates around the plane with normal `v` when more than two particles
/// lie on it: every line through the origin in the plane, taken just before
/// and just after it sweeps across a particle direction.
fn planar_candidates(
    p: &[Momentum3],
    norms: &[f64],
    v: &Momentum3,
    on_plane: &[usize],
    base: &[bool],
    base_sum: Momentum3,
    best: &mut Best,
) {
    for &a in on_plane {
        let m0 = v.cross(&p[a]);
        let m0n = m0.norm();
        if m0n == 0.0 {
            continue;
        }
        for m_sign in [1.0, -1.0] {
            let m = m0 * m_sign;
            for along in [true, false] {
                let side = |k: usize| -> bool {
                    let e = m.dot(&p[k]);
                    if e.abs() <= PLANE_TOLERANCE * m0n * norms[k] {
                        (p[a].dot(&p[k]) > 0.0) == along
                    } else {
                        e > 0.0
                    }
                };
                let sum = on_plane
                    .iter()
                    .filter(|&&k| side(k))
                    .fold(base_sum, |s, &k| s + p[k]);
                best.offer(sum.norm2(), || {
                    let mut x = base.to_vec();
                    for &k in on_plane {
                        x[k] = side(k);
                    }
                    Partition::new(x)
                });
            }
        }
    }
}

/// Exact thrust by enumerating all `2^(N-1)` partitions with particle 0
/// outside the jet. Used as a validation oracle.
pub fn thrust_brute_force(event: &Event) -> Result<ThrustResult> {
    let p: Vec<Momentum3> = event.momenta().copied().collect();
    let n = p.len();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX,
        });
    }
    check_event(event)?;
    let free = n - 1;
    let mut best = Best::new();
    let mut mask: u32 = 0;
    let mut sum = Momentum3::ZERO;
    let to_partition = |mask: u32| {
        Partition::from_fn(n, |k| k > 0 && (mask >> (k - 1)) & 1 == 1)
    };
    best.offer(0.0, || to_partition(0));
    // Gray-code walk: each step toggles exactly one particle.
    for step in 1u32..(1u32 << free) {
        let bit = step.trailing_zeros();
        mask ^= 1 << bit;
        let k = bit as usize + 1;
        if (mask >> bit) & 1 == 1 {
            sum += p[k];
        } else {
            sum -= p[k];
        }
        let m = mask;
        best.offer(sum.norm2(), || to_partition(m));
    }
    let partition = best.partition.expect("at least one candidate");
    ThrustResult::from_partition(event, &partition)
}
