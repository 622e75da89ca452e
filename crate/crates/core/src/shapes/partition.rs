use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::events::{Event, Momentum3};

/// Hemisphere assignment: `true` marks a particle inside the jet.
///
/// Ordering is lexicographic in particle index with `false < true`, which is
/// what [`Partition::canonical`] uses to pick between a partition and its
/// complement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Partition(Vec<bool>);

impl Partition {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> bool) -> Self {
        Self((0..n).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Partition {
        Partition(self.0.iter().map(|b| !b).collect())
    }

    /// The lexicographically smaller of `self` and its complement.
    pub fn canonical(&self) -> Partition {
        let c = self.complement();
        if c < *self {
            c
        } else {
            self.clone()
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.0.first().is_none_or(|b| !b)
    }

    /// Spins in the `+1 / -1` convention.
    pub fn spins(&self) -> impl Iterator<Item = i8> + '_ {
        self.0.iter().map(|&b| if b { 1 } else { -1 })
    }

    /// `sum_i x_i p_i`.
    pub fn jet_momentum(&self, event: &Event) -> Result<Momentum3> {
        self.check_len(event.len())?;
        Ok(self
            .0
            .iter()
            .zip(event.momenta())
            .filter(|(&b, _)| b)
            .map(|(_, p)| *p)
            .sum())
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl From<Vec<bool>> for Partition {
    fn from(v: Vec<bool>) -> Self {
        Self(v)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 0,
                    msg: format!("bad partition digit `{other}`"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Partition)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_has_leading_zero() {
        let p = Partition::new(vec![true, false, true]);
        assert_eq!(p.canonical(), Partition::new(vec![false, true, false]));
        assert!(p.canonical().is_canonical());
        assert_eq!(p.canonical(), p.complement().canonical());
    }

    #[test]
    fn display_round_trip() {
        let p = Partition::new(vec![false, true, true, false]);
        assert_eq!(p.to_string(), "0110");
        assert_eq!("0110".parse::<Partition>().unwrap(), p);
        assert!("01x".parse::<Partition>().is_err());
    }
}
