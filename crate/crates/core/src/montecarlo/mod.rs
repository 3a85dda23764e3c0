//! Reproducible path simulation and Monte Carlo estimators.
//!
//! Each path draws from its own ChaCha8 stream seeded with
//! `splitmix64(seed) ^ path_index`, so results do not depend on how paths are scheduled
//! across threads.

mod estimators;
mod walker;

pub use estimators::{
    estimate_exit_time, estimate_invariant_histogram, estimate_transition_probability, ExitTimeEstimate,
    InvariantHistogram, TransitionEstimate, MIN_PATHS,
};
pub use walker::BOUNDARY_EPS;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::SwitchingDiffusionModel;
use walker::{path_rng, Normals, Walker};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Absorb at boundaries classified absorbing for the current phase,
    /// reflect elsewhere.
    #[default]
    Classified,
    Reflect,
    Absorb,
    Clamp,
}

/// Phase update within one step, with the position frozen at the start of
/// the step. Both fire the first jump with probability `1 - exp(Q_ii h)` and
/// pick the target from `-Q_ij / Q_ii`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpScheme {
    /// Keeps drawing holding times for the rest of the step, so the phase
    /// chain is exact for frozen `x` even where `|Q_ii| h` is large.
    #[default]
    Frozen,
    /// At most one jump per step.
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub step: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub boundary_policy: BoundaryPolicy,
    #[serde(default)]
    pub jump_scheme: JumpScheme,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            horizon: 1.0,
            n_paths: 10_000,
            seed: 0,
            boundary_policy: BoundaryPolicy::Classified,
            jump_scheme: JumpScheme::Frozen,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid("step", "must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", "must be positive"));
        }
        if self.step > self.horizon {
            return Err(invalid("step", "must not exceed the horizon"));
        }
        if self.n_paths == 0 {
            return Err(invalid("n_paths", "must be positive"));
        }
        Ok(())
    }

    /// Number of steps to reach the horizon.
    pub fn n_steps(&self) -> usize {
        (self.horizon / self.step).round().max(1.0) as usize
    }

    /// A warning when `|Q_ii(x)| h` exceeds 0.1 somewhere on a grid of
    /// interior points.
    pub fn step_warning(&self, m: &SwitchingDiffusionModel) -> Result<Option<String>> {
        let w = Walker::new(m, self)?;
        let s = w.stiffness(1000);
        Ok((s > 0.1).then(|| format!("max |Q_ii(x)| h = {s:.3} exceeds 0.1; consider a smaller step")))
    }
}

/// A simulated trajectory. Phases are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub phases: Vec<usize>,
    /// Indices into `times` of steps that end in a different phase.
    pub jump_times: Vec<usize>,
    /// Time of absorption, if the path stopped at a boundary.
    pub absorbed_at: Option<f64>,
    pub seed: u64,
}

impl PathSample {
    /// Fraction of recorded steps spent in each phase.
    pub fn occupancy(&self, n_phases: usize) -> Vec<f64> {
        let mut c = vec![0.0; n_phases];
        for &p in &self.phases {
            c[p - 1] += 1.0;
        }
        let total = self.phases.len() as f64;
        c.iter_mut().for_each(|v| *v /= total);
        c
    }

    /// `time,position,phase` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "time,position,phase")?;
        for ((t, x), p) in self.times.iter().zip(&self.positions).zip(&self.phases) {
            writeln!(out, "{t:.16e},{x:.16e},{p}")?;
        }
        Ok(())
    }
}

/// Simulates one path from `(x0, i0)` with the stream for path index 0.
pub fn simulate_path(m: &SwitchingDiffusionModel, x0: f64, i0: usize, cfg: &SimConfig) -> Result<PathSample> {
    simulate_indexed(m, x0, i0, cfg, 0)
}

/// Simulates the path with stream `splitmix64(seed) ^ path_index`.
pub fn simulate_indexed(
    m: &SwitchingDiffusionModel,
    x0: f64,
    i0: usize,
    cfg: &SimConfig,
    path_index: u64,
) -> Result<PathSample> {
    let w = Walker::new(m, cfg)?;
    w.check_start(x0, i0)?;
    let n = cfg.n_steps();
    let mut rng = path_rng(cfg.seed, path_index);
    let mut normals = Normals::default();
    let (mut x, mut i) = (x0, i0);
    let mut s = PathSample {
        times: Vec::with_capacity(n + 1),
        positions: Vec::with_capacity(n + 1),
        phases: Vec::with_capacity(n + 1),
        jump_times: Vec::new(),
        absorbed_at: None,
        seed: cfg.seed,
    };
    s.times.push(0.0);
    s.positions.push(x);
    s.phases.push(i);
    for k in 1..=n {
        let out = w.advance(&mut x, &mut i, &mut rng, &mut normals);
        s.times.push(k as f64 * cfg.step);
        s.positions.push(x);
        s.phases.push(i);
        if out.jumped {
            s.jump_times.push(k);
        }
        if out.absorbed {
            s.absorbed_at = Some(k as f64 * cfg.step);
            break;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{wright_fisher_model, WrightFisherParams};

    fn wf(a: f64, b: f64, k: f64, n: usize) -> SwitchingDiffusionModel {
        wright_fisher_model(WrightFisherParams::new(a, b, k, n).unwrap()).unwrap()
    }

    fn cfg(horizon: f64, seed: u64, policy: BoundaryPolicy) -> SimConfig {
        SimConfig {
            step: 1e-3,
            horizon,
            n_paths: 1,
            seed,
            boundary_policy: policy,
            jump_scheme: JumpScheme::Single,
        }
    }

    #[test]
    fn same_seed_same_path() {
        let m = wf(0.0, 0.0, 0.5, 4);
        let c = cfg(2.0, 42, BoundaryPolicy::Classified);
        assert_eq!(simulate_path(&m, 0.4, 2, &c).unwrap(), simulate_path(&m, 0.4, 2, &c).unwrap());
        let other = simulate_path(&m, 0.4, 2, &cfg(2.0, 43, BoundaryPolicy::Classified)).unwrap();
        assert_ne!(other.positions, simulate_path(&m, 0.4, 2, &c).unwrap().positions);
    }

    #[test]
    fn single_phase_never_jumps() {
        let s = simulate_path(&wf(1.0, 1.0, 0.5, 1), 0.5, 1, &cfg(3.0, 1, BoundaryPolicy::Reflect)).unwrap();
        assert!(s.jump_times.is_empty());
        assert!(s.phases.iter().all(|&p| p == 1));
    }

    #[test]
    fn tridiagonal_jumps_are_adjacent_and_continuous() {
        // the 3-sigma bound is exceeded by a standard normal with probability 0.0027
        let m = wf(0.5, 0.5, 0.7, 4);
        let p = *m.wright_fisher_params().unwrap();
        let h: f64 = 1e-3;
        let (mut jumps, mut over) = (0usize, 0usize);
        for seed in 0..20 {
            let s = simulate_path(&m, 0.5, 1, &cfg(5.0, seed, BoundaryPolicy::Reflect)).unwrap();
            for &k in &s.jump_times {
                assert_eq!(s.phases[k].abs_diff(s.phases[k - 1]), 1);
                let x = s.positions[k - 1];
                let sd = (2.0 * x * (1.0 - x)).sqrt() * h.sqrt();
                let dx = (s.positions[k] - x).abs();
                let tau = p.drift_entry(s.phases[k - 1], x).abs() * h;
                assert!(dx <= 6.0 * sd + tau + 1e-12);
                jumps += 1;
                over += usize::from(dx > 3.0 * sd + tau + 1e-12);
            }
        }
        assert!(jumps > 500);
        assert!((over as f64) < 0.01 * jumps as f64, "{over} of {jumps}");
    }

    #[test]
    fn reflect_and_clamp_stay_in_unit_interval() {
        let m = wf(-0.5, -0.5, 0.2, 3);
        for policy in [BoundaryPolicy::Reflect, BoundaryPolicy::Clamp] {
            for seed in 0..5 {
                let s = simulate_path(&m, 0.05, 3, &cfg(2.0, seed, policy)).unwrap();
                assert!(s.positions.iter().all(|&x| (0.0..=1.0).contains(&x)));
                assert!(s.absorbed_at.is_none());
            }
        }
    }

    #[test]
    fn absorb_policy_stops_path() {
        let m = wf(-0.5, -0.5, 0.2, 3);
        let s = (0..20)
            .map(|seed| simulate_path(&m, 0.02, 3, &cfg(5.0, seed, BoundaryPolicy::Absorb)).unwrap())
            .find(|s| s.absorbed_at.is_some())
            .expect("some path is absorbed");
        let last = *s.positions.last().unwrap();
        assert!(last == 0.0 || last == 1.0);
        assert_eq!(s.times.len(), s.positions.len());
    }

    #[test]
    fn small_k_favours_last_phase() {
        let m = wf(0.0, 0.0, 0.05, 3);
        let s = simulate_path(&m, 0.5, 1, &cfg(200.0, 3, BoundaryPolicy::Classified)).unwrap();
        let occ = s.occupancy(3);
        assert!(occ[2] > occ[0], "{occ:?}");
    }

    #[test]
    fn invalid_start_rejected() {
        let m = wf(0.0, 0.0, 0.5, 2);
        let c = cfg(1.0, 0, BoundaryPolicy::Reflect);
        assert!(simulate_path(&m, 0.0, 1, &c).is_err());
        assert!(simulate_path(&m, 0.5, 3, &c).is_err());
        assert!(simulate_path(&m, 0.5, 0, &c).is_err());
    }

    #[test]
    fn csv_dump_rows() {
        let s = simulate_path(&wf(0.0, 0.0, 0.5, 2), 0.5, 1, &cfg(0.01, 0, BoundaryPolicy::Reflect)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,position,phase\n"));
        assert_eq!(text.lines().count(), s.times.len() + 1);
    }
}
