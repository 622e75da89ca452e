//! Events, the toy dijet generator and the plain-text event format.
//!
//! Particles follow the massless convention `E = |p|`. Only the SingleCone
//! matrix reads energies, and with massless particles it reduces exactly to
//! the thrust matrix at `R = pi/2`.

use std::fmt::Write as _;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Relative tolerance on the net momentum of a balanced event.
pub const BALANCE_TOLERANCE: f64 = 1e-9;

/// Three-momentum in GeV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Momentum3 {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl Momentum3 {
    pub const ZERO: Momentum3 = Momentum3::new(0.0, 0.0, 0.0);

    pub const fn new(px: f64, py: f64, pz: f64) -> Self {
        Self { px, py, pz }
    }

    pub fn dot(&self, other: &Momentum3) -> f64 {
        self.px * other.px + self.py * other.py + self.pz * other.pz
    }

    pub fn cross(&self, other: &Momentum3) -> Momentum3 {
        Momentum3::new(
            self.py * other.pz - self.pz * other.py,
            self.pz * other.px - self.px * other.pz,
            self.px * other.py - self.py * other.px,
        )
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    /// Unit vector along `self`, or `None` for a zero vector.
    pub fn unit(&self) -> Option<Momentum3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| *self * (1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.px.is_finite() && self.py.is_finite() && self.pz.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.px, self.py, self.pz]
    }
}

impl Add for Momentum3 {
    type Output = Momentum3;
    fn add(self, o: Momentum3) -> Momentum3 {
        Momentum3::new(self.px + o.px, self.py + o.py, self.pz + o.pz)
    }
}

impl AddAssign for Momentum3 {
    fn add_assign(&mut self, o: Momentum3) {
        self.px += o.px;
        self.py += o.py;
        self.pz += o.pz;
    }
}

impl Sub for Momentum3 {
    type Output = Momentum3;
    fn sub(self, o: Momentum3) -> Momentum3 {
        Momentum3::new(self.px - o.px, self.py - o.py, self.pz - o.pz)
    }
}

impl SubAssign for Momentum3 {
    fn sub_assign(&mut self, o: Momentum3) {
        self.px -= o.px;
        self.py -= o.py;
        self.pz -= o.pz;
    }
}

impl Neg for Momentum3 {
    type Output = Momentum3;
    fn neg(self) -> Momentum3 {
        Momentum3::new(-self.px, -self.py, -self.pz)
    }
}

impl Mul<f64> for Momentum3 {
    type Output = Momentum3;
    fn mul(self, s: f64) -> Momentum3 {
        Momentum3::new(self.px * s, self.py * s, self.pz * s)
    }
}

impl std::iter::Sum for Momentum3 {
    fn sum<I: Iterator<Item = Momentum3>>(iter: I) -> Momentum3 {
        iter.fold(Momentum3::ZERO, |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub momentum: Momentum3,
    pub energy: f64,
}

impl Particle {
    pub fn massless(momentum: Momentum3) -> Self {
        Self {
            momentum,
            energy: momentum.norm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub id: u64,
    pub particles: Vec<Particle>,
    pub balanced: bool,
}

impl Event {
    /// Builds an event from momenta. The `balanced` flag is computed, not
    /// enforced.
    pub fn new(id: u64, momenta: impl IntoIterator<Item = Momentum3>) -> Result<Self> {
        let particles: Vec<Particle> = momenta.into_iter().map(Particle::massless).collect();
        if particles.len() < 2 {
            return Err(Error::TooFewParticles {
                id,
                n: particles.len(),
            });
        }
        let mut event = Event {
            id,
            particles,
            balanced: false,
        };
        event.balanced = event.is_balanced();
        Ok(event)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn momenta(&self) -> impl Iterator<Item = &Momentum3> + '_ {
        self.particles.iter().map(|p| &p.momentum)
    }

    pub fn net_momentum(&self) -> Momentum3 {
        self.momenta().copied().sum()
    }

    /// Sum of `|p_i|`.
    pub fn scalar_sum(&self) -> f64 {
        self.momenta().map(Momentum3::norm).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.net_momentum().norm() <= BALANCE_TOLERANCE * self.scalar_sum()
    }

    /// Index of the particle with the largest `|p|` (first on ties).
    pub fn hardest(&self) -> usize {
        let mut best = 0;
        let mut best_norm = f64::NEG_INFINITY;
        for (i, p) in self.momenta().enumerate() {
            let n = p.norm2();
            if n > best_norm {
                best = i;
                best_norm = n;
            }
        }
        best
    }
}

/// Moves an event to its centre-of-mass frame by subtracting the mean
/// momentum from every particle.
pub fn balance(event: &Event) -> Event {
    let n = event.len() as f64;
    let shift = event.net_momentum() * (1.0 / n);
    let particles: Vec<Particle> = event
        .momenta()
        .map(|p| Particle::massless(*p - shift))
        .collect();
    let mut out = Event {
        id: event.id,
        particles,
        balanced: false,
    };
    out.balanced = out.is_balanced();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Centre-of-mass energy in GeV.
    pub com_energy: f64,
    /// Transverse spread relative to the longitudinal momentum.
    pub transverse_smear: f64,
    pub rng_seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_min: 17,
            n_max: 40,
            com_energy: 91.1876,
            transverse_smear: 0.25,
            rng_seed: 1,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 2 || self.n_min > self.n_max {
            return Err(Error::InvalidMultiplicity {
                n_min: self.n_min,
                n_max: self.n_max,
            });
        }
        if !(self.com_energy > 0.0 && self.com_energy.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "com_energy must be positive, got {}",
                self.com_energy
            )));
        }
        if !(self.transverse_smear >= 0.0 && self.transverse_smear.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "transverse_smear must be non-negative, got {}",
                self.transverse_smear
            )));
        }
        Ok(())
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> Momentum3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Momentum3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Two unit vectors completing `axis` to a right-handed orthonormal basis.
pub(crate) fn orthonormal_basis(axis: &Momentum3) -> (Momentum3, Momentum3) {
    let helper = if axis.px.abs() < 0.9 {
        Momentum3::new(1.0, 0.0, 0.0)
    } else {
        Momentum3::new(0.0, 1.0, 0.0)
    };
    let u = axis.cross(&helper).unit().expect("helper is never parallel");
    let v = axis.cross(&u);
    (u, v)
}

/// Generates one momentum-balanced toy dijet event.
///
/// Two back-to-back particle groups are placed along a random axis. Each
/// particle gets an exponentially distributed longitudinal momentum with mean
/// `com_energy / N` and Gaussian transverse components with width
/// `transverse_smear` times its longitudinal momentum. The event is then
/// recentred. Output depends only on `(config.rng_seed, event_id)`.
pub fn generate_dijet_event(config: &GeneratorConfig, event_id: u64) -> Result<Event> {
    config.validate()?;
    let mut rng = rng::stream(config.rng_seed, &[event_id]);
    let n = rng.random_range(config.n_min..=config.n_max);
    let axis = random_unit(&mut rng);
    let (u, v) = orthonormal_basis(&axis);
    let longitudinal = Exp::new(n as f64 / config.com_energy)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let forward = n - n / 2;

    let momenta: Vec<Momentum3> = (0..n)
        .map(|i| {
            let sign = if i < forward { 1.0 } else { -1.0 };
            let l: f64 = longitudinal.sample(&mut rng);
            let width = config.transverse_smear * l;
            let t1: f64 = StandardNormal.sample(&mut rng);
            let t2: f64 = StandardNormal.sample(&mut rng);
            axis * (sign * l) + u * (width * t1) + v * (width * t2)
        })
        .collect();
    Ok(balance(&Event::new(event_id, momenta)?))
}

/// Generates events with ids `first_id .. first_id + count`.
pub fn generate_dataset(config: &GeneratorConfig, first_id: u64, count: usize) -> Result<Vec<Event>> {
    (0..count as u64)
        .map(|k| generate_dijet_event(config, first_id + k))
        .collect()
}

/// Serialises events in the `E <id> <N>` / `<px> <py> <pz>` text format.
///
/// Values use Rust's shortest round-trip decimal form, so parsing the output
/// reproduces every component exactly.
pub fn format_events(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        let _ = writeln!(out, "E {} {}", e.id, e.len());
        for p in e.momenta() {
            let _ = writeln!(out, "{} {} {}", p.px, p.py, p.pz);
        }
    }
    out
}

pub fn save_events(path: impl AsRef<Path>, events: &[Event]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_events(events)).map_err(|e| Error::io(path, e))
}

pub fn load_events(path: impl AsRef<Path>) -> Result<Vec<Event>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_events(&text)
}

pub fn parse_events(text: &str) -> Result<Vec<Event>> {
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut events = Vec::new();
    while let Some((lineno, line)) = lines.next() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let (id, n) = match tokens.as_slice() {
            ["E", id, n] => {
                let id: u64 = id
                    .parse()
                    .map_err(|_| perr(lineno, format!("bad event id `{id}`")))?;
                let n: usize = n
                    .parse()
                    .map_err(|_| perr(lineno, format!("bad particle count `{n}`")))?;
                (id, n)
            }
            _ => return Err(perr(lineno, format!("expected `E <id> <N>`, got `{line}`"))),
        };
        if n < 2 {
            return Err(Error::TooFewParticles { id, n });
        }
        let mut momenta = Vec::with_capacity(n);
        for k in 0..n {
            let (pl, pline) = lines.next().ok_or_else(|| {
                perr(lineno, format!("event {id}: header declares {n} particles, found {k}"))
            })?;
            let comps: Vec<&str> = pline.split_whitespace().collect();
            if comps.first() == Some(&"E") {
                return Err(perr(
                    pl,
                    format!("event {id}: header declares {n} particles, found {k}"),
                ));
            }
            if comps.len() != 3 {
                return Err(perr(pl, format!("expected 3 momentum components, got `{pline}`")));
            }
            let mut xyz = [0.0; 3];
            for (slot, tok) in xyz.iter_mut().zip(&comps) {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| perr(pl, format!("bad number `{tok}`")))?;
                if !v.is_finite() {
                    return Err(perr(pl, format!("non-finite momentum component `{tok}`")));
                }
                *slot = v;
            }
            momenta.push(Momentum3::new(xyz[0], xyz[1], xyz[2]));
        }
        events.push(Event::new(id, momenta)?);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Momentum3, b: &Momentum3, tol: f64) -> bool {
        (*a - *b).norm() <= tol
    }

    #[test]
    fn zero_smear_pair_is_back_to_back() {
        let cfg = GeneratorConfig {
            n_min: 2,
            n_max: 2,
            transverse_smear: 0.0,
            ..Default::default()
        };
        let e = generate_dijet_event(&cfg, 3).unwrap();
        assert_eq!(e.len(), 2);
        let (a, b) = (e.particles[0].momentum, e.particles[1].momentum);
        assert!(close(&a, &-b, 1e-12 * a.norm()));
        assert!(a.cross(&b).norm() <= 1e-12 * a.norm2());
    }

    #[test]
    fn generated_events_are_balanced_and_deterministic() {
        let cfg = GeneratorConfig::default();
        for id in 0..50 {
            let e = generate_dijet_event(&cfg, id).unwrap();
            assert!(e.balanced);
            assert!(e.net_momentum().norm() < 1e-9 * e.scalar_sum());
            assert!((cfg.n_min..=cfg.n_max).contains(&e.len()));
            let again = generate_dijet_event(&cfg, id).unwrap();
            assert_eq!(e, again);
        }
        let a = generate_dijet_event(&cfg, 0).unwrap();
        let b = generate_dijet_event(&cfg, 1).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn invalid_multiplicity_is_rejected() {
        let cfg = GeneratorConfig {
            n_min: 5,
            n_max: 4,
            ..Default::default()
        };
        assert!(matches!(
            generate_dijet_event(&cfg, 0),
            Err(Error::InvalidMultiplicity { .. })
        ));
        let cfg = GeneratorConfig {
            n_min: 1,
            n_max: 4,
            ..Default::default()
        };
        assert!(generate_dijet_event(&cfg, 0).is_err());
    }

    #[test]
    fn massless_energy() {
        let p = Particle::massless(Momentum3::new(3.0, 4.0, 12.0));
        assert_eq!(p.energy, 13.0);
    }

    #[test]
    fn balance_is_idempotent() {
        let cfg = GeneratorConfig::default();
        let e = generate_dijet_event(&cfg, 11).unwrap();
        let b1 = balance(&e);
        for (x, y) in e.momenta().zip(b1.momenta()) {
            assert!(close(x, y, 1e-12 * e.scalar_sum()));
        }
        let b2 = balance(&b1);
        for (x, y) in b1.momenta().zip(b2.momenta()) {
            assert!(close(x, y, 1e-12));
        }
    }

    #[test]
    fn balance_removes_common_offset() {
        let cfg = GeneratorConfig::default();
        let e = generate_dijet_event(&cfg, 5).unwrap();
        let d = Momentum3::new(1.5, -2.0, 0.25);
        let shifted = Event::new(e.id, e.momenta().map(|p| *p + d)).unwrap();
        assert!(!shifted.balanced);
        let fixed = balance(&shifted);
        assert!(fixed.balanced);
        for (orig, rec) in e.momenta().zip(fixed.momenta()) {
            assert!(close(orig, rec, 1e-12 * e.scalar_sum()));
        }
    }

    #[test]
    fn balance_random_unbalanced() {
        use rand::Rng;
        let mut rng = rng::stream(99, &[]);
        for id in 0..20 {
            let n = rng.random_range(2..30);
            let momenta: Vec<Momentum3> = (0..n)
                .map(|_| {
                    Momentum3::new(
                        rng.random_range(-10.0..10.0),
                        rng.random_range(-10.0..10.0),
                        rng.random_range(-10.0..10.0),
                    )
                })
                .collect();
            let e = balance(&Event::new(id, momenta).unwrap());
            assert!(e.net_momentum().norm() <= 1e-12 * e.scalar_sum());
        }
    }

    #[test]
    fn parse_single_event() {
        let text = "# comment\nE 4 2\n1.0 0 0\n-1.0 0 0\n";
        let evs = parse_events(text).unwrap();
        assert_eq!(evs.len(), 1);
        assert_eq!(evs[0].id, 4);
        assert!(evs[0].balanced);
    }

    #[test]
    fn parse_count_mismatch() {
        let text = "E 1 3\n1 0 0\n-1 0 0\nE 2 2\n1 0 0\n-1 0 0\n";
        match parse_events(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = "E 1 3\n1 0 0\n-1 0 0\n";
        assert!(matches!(parse_events(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(
            parse_events("E 1 1\n1 0 0\n"),
            Err(Error::TooFewParticles { .. })
        ));
        match parse_events("E 1 2\n1 0 0\nnan 0 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_events("E 1 2\n1 0\n-1 0 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_events("X 1 2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn unbalanced_file_event_is_flagged() {
        let evs = parse_events("E 1 2\n1 0 0\n2 0 0\n").unwrap();
        assert!(!evs[0].balanced);
    }
}
