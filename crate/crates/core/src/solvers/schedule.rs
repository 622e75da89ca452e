use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear control trajectory given as `[t, s]` points.
///
/// `s = 0` is the hot end (`beta_min`), `s = 1` the cold end (`beta_max`).
/// Time is in abstract units that [`SolverConfig::sweeps_per_unit_time`]
/// converts to Monte Carlo sweeps.
///
/// [`SolverConfig::sweeps_per_unit_time`]: super::SolverConfig::sweeps_per_unit_time
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct AnnealSchedule {
    points: Vec<[f64; 2]>,
}

impl AnnealSchedule {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidSchedule(m));
        if points.len() < 2 {
            return bad("need at least two points".into());
        }
        if points[0][0] != 0.0 {
            return bad(format!("first time must be 0, got {}", points[0][0]));
        }
        for w in points.windows(2) {
            if !(w[1][0] > w[0][0]) {
                return bad(format!("times must increase strictly: {} then {}", w[0][0], w[1][0]));
            }
        }
        if let Some(p) = points.iter().find(|p| !(0.0..=1.0).contains(&p[1]) || !p[0].is_finite()) {
            return bad(format!("s must lie in [0, 1], got {}", p[1]));
        }
        Ok(Self { points })
    }

    /// Linear ramp `{[0, 0], [duration, 1]}`.
    pub fn forward(duration: f64) -> Result<Self> {
        Self::new(vec![[0.0, 0.0], [duration, 1.0]])
    }

    /// `{[0, 1], [t, s_turn], [duration, 1]}`.
    pub fn reverse(turn_time: f64, s_turn: f64, duration: f64) -> Result<Self> {
        Self::new(vec![[0.0, 1.0], [turn_time, s_turn], [duration, 1.0]])
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn duration(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p[0])
    }

    pub fn starts_and_ends_cold(&self) -> bool {
        self.points.first().is_some_and(|p| p[1] == 1.0) && self.points.last().is_some_and(|p| p[1] == 1.0)
    }

    /// `s(t)` by linear interpolation, clamped to the schedule's ends.
    pub fn s_at(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0][0] {
            return pts[0][1];
        }
        for w in pts.windows(2) {
            let ([t0, s0], [t1, s1]) = (w[0], w[1]);
            if t <= t1 {
                return s0 + (s1 - s0) * (t - t0) / (t1 - t0);
            }
        }
        pts[pts.len() - 1][1]
    }

    pub fn total_sweeps(&self, sweeps_per_unit_time: usize) -> usize {
        ((sweeps_per_unit_time as f64 * self.duration()).round() as usize).max(1)
    }

    /// Inverse temperature for every sweep: `beta(s) = beta_min (beta_max / beta_min)^s`,
    /// with sweep `k` sampling the schedule at `t = k / (total - 1) * duration`.
    pub fn betas(&self, sweeps_per_unit_time: usize, beta_min: f64, beta_max: f64) -> Vec<f64> {
        let total = self.total_sweeps(sweeps_per_unit_time);
        let ratio = beta_max / beta_min;
        let duration = self.duration();
        (0..total)
            .map(|k| {
                let t = if total == 1 {
                    0.0
                } else {
                    duration * k as f64 / (total - 1) as f64
                };
                beta_min * ratio.powf(self.s_at(t))
            })
            .collect()
    }
}

impl TryFrom<Vec<[f64; 2]>> for AnnealSchedule {
    type Error = Error;
    fn try_from(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<AnnealSchedule> for Vec<[f64; 2]> {
    fn from(s: AnnealSchedule) -> Self {
        s.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_forward_and_reverse() {
        let f = AnnealSchedule::forward(20.0).unwrap();
        assert_eq!(f.points(), &[[0.0, 0.0], [20.0, 1.0]]);
        assert_eq!(f.total_sweeps(50), 1000);
        let r = AnnealSchedule::reverse(5.0, 0.5, 20.0).unwrap();
        assert!(r.starts_and_ends_cold());
        assert!(!f.starts_and_ends_cold());
        assert_eq!(r.s_at(0.0), 1.0);
        assert_eq!(r.s_at(5.0), 0.5);
        assert!((r.s_at(12.5) - 0.75).abs() < 1e-15);
        assert_eq!(r.s_at(20.0), 1.0);
    }

    #[test]
    fn betas_follow_schedule() {
        let f = AnnealSchedule::forward(2.0).unwrap();
        let b = f.betas(5, 0.1, 10.0);
        assert_eq!(b.len(), 10);
        assert!((b[0] - 0.1).abs() < 1e-15);
        assert!((b[9] - 10.0).abs() < 1e-12);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        let r = AnnealSchedule::reverse(10.0, 0.5, 20.0).unwrap();
        let b = r.betas(10, 0.1, 10.0);
        let mid = b.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((mid - 1.0).abs() < 0.05);
        assert!((b[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_schedules() {
        assert!(AnnealSchedule::new(vec![[0.0, 0.0]]).is_err());
        assert!(AnnealSchedule::new(vec![[1.0, 0.0], [2.0, 1.0]]).is_err());
        assert!(AnnealSchedule::new(vec![[0.0, 0.0], [0.0, 1.0]]).is_err());
        assert!(AnnealSchedule::new(vec![[0.0, 0.0], [5.0, 1.5]]).is_err());
        let s: AnnealSchedule = serde_json::from_str("[[0,1],[5,0.5],[20,1]]").unwrap();
        assert_eq!(s.duration(), 20.0);
        assert!(serde_json::from_str::<AnnealSchedule>("[[0,1],[0,0.5]]").is_err());
    }
}
