use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::walker::{path_rng, Normals, Walker};
use super::SimConfig;
use crate::error::{invalid, Error, Result};
use crate::matrix::PhaseMatrix;
use crate::model::SwitchingDiffusionModel;

pub const MIN_PATHS: usize = 100;

/// Empirical `P(X_t in [lo, hi], Y_t = j | X_0 = x0, Y_0 = i)`.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionEstimate {
    pub mean: PhaseMatrix,
    /// Binomial standard errors `sqrt(p (1 - p) / n)`.
    pub std_error: PhaseMatrix,
    /// Per starting phase, the frequency of ending outside the interval.
    pub outside: Vec<f64>,
    pub n_paths: usize,
    pub warning: Option<String>,
}

fn check_paths(cfg: &SimConfig) -> Result<()> {
    if cfg.n_paths < MIN_PATHS {
        return Err(invalid("n_paths", format!("need at least {MIN_PATHS} paths")));
    }
    Ok(())
}

/// Runs `n_paths` paths per starting phase up to time `t`; path `p` from
/// phase `i` uses stream index `(i - 1) n_paths + p`.
pub fn estimate_transition_probability(
    m: &SwitchingDiffusionModel,
    x0: f64,
    t: f64,
    (lo, hi): (f64, f64),
    cfg: &SimConfig,
) -> Result<TransitionEstimate> {
    check_paths(cfg)?;
    if !(lo < hi) {
        return Err(Error::Empty("target interval"));
    }
    let cfg = SimConfig { horizon: t, ..*cfg };
    let w = Walker::new(m, &cfg)?;
    let n = m.n_phases();
    w.check_start(x0, 1)?;
    let steps = cfg.n_steps();
    let np = cfg.n_paths;
    let mut counts = vec![vec![0usize; n]; n];
    for i0 in 1..=n {
        let finals: Vec<(f64, usize)> = (0..np)
            .into_par_iter()
            .map(|p| {
                let mut rng = path_rng(cfg.seed, ((i0 - 1) * np + p) as u64);
                let mut normals = Normals::default();
                let (mut x, mut i) = (x0, i0);
                for _ in 0..steps {
                    if w.advance(&mut x, &mut i, &mut rng, &mut normals).absorbed {
                        break;
                    }
                }
                (x, i)
            })
            .collect();
        for (x, j) in finals {
            if x >= lo && x <= hi {
                counts[i0 - 1][j - 1] += 1;
            }
        }
    }
    let nf = np as f64;
    let mean = PhaseMatrix::from_fn(n, |i, j| counts[i][j] as f64 / nf);
    let std_error = PhaseMatrix::from_fn(n, |i, j| {
        let p = mean[(i, j)];
        (p * (1.0 - p) / nf).sqrt()
    });
    let outside = (0..n)
        .map(|i| (np - counts[i].iter().sum::<usize>()) as f64 / nf)
        .collect();
    Ok(TransitionEstimate {
        mean,
        std_error,
        outside,
        n_paths: np,
        warning: cfg.step_warning(m)?,
    })
}

/// Time-averaged occupancy of `(position bin, phase)` after a burn-in.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantHistogram {
    pub lo: f64,
    pub hi: f64,
    /// `mass[j][b]`: phase `j + 1`, bin `b`; sums to 1.
    pub mass: Vec<Vec<f64>>,
    pub samples: u64,
}

impl InvariantHistogram {
    pub fn bins(&self) -> usize {
        self.mass.first().map_or(0, |v| v.len())
    }

    pub fn phase_masses(&self) -> Vec<f64> {
        self.mass.iter().map(|v| v.iter().sum()).collect()
    }

    /// `1/2 sum |p - q|` against another `(phase, bin)` table.
    pub fn tv_distance(&self, other: &[Vec<f64>]) -> Result<f64> {
        if other.len() != self.mass.len() || other.iter().any(|r| r.len() != self.bins()) {
            return Err(Error::DimensionMismatch {
                expected: self.mass.len() * self.bins(),
                found: other.iter().map(|r| r.len()).sum(),
            });
        }
        Ok(0.5
            * self
                .mass
                .iter()
                .zip(other)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .sum::<f64>())
    }
}

/// Runs `cfg.n_paths` paths from `(x0, i0)` to `cfg.horizon` and bins every
/// step after `burn_in`.
pub fn estimate_invariant_histogram(
    m: &SwitchingDiffusionModel,
    x0: f64,
    i0: usize,
    cfg: &SimConfig,
    burn_in: f64,
    bins: usize,
) -> Result<InvariantHistogram> {
    if !(cfg.horizon > burn_in) || burn_in < 0.0 {
        return Err(invalid("burn_in", "must be non-negative and below the horizon"));
    }
    if bins == 0 {
        return Err(invalid("bins", "need at least one bin"));
    }
    let (lo, hi) = m.interval();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(invalid("model", "histogram needs a bounded interval"));
    }
    let w = Walker::new(m, cfg)?;
    w.check_start(x0, i0)?;
    let n = m.n_phases();
    let steps = cfg.n_steps();
    let skip = (burn_in / cfg.step).round() as usize;
    let per_path: Vec<Vec<u64>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(cfg.seed, p as u64);
            let mut normals = Normals::default();
            let (mut x, mut i) = (x0, i0);
            let mut c = vec![0u64; n * bins];
            for k in 1..=steps {
                let absorbed = w.advance(&mut x, &mut i, &mut rng, &mut normals).absorbed;
                if k > skip {
                    let b = (((x - lo) / (hi - lo)) * bins as f64).floor().clamp(0.0, (bins - 1) as f64) as usize;
                    c[(i - 1) * bins + b] += if absorbed { (steps - k + 1) as u64 } else { 1 };
                }
                if absorbed {
                    break;
                }
            }
            c
        })
        .collect();
    let mut total = vec![0u64; n * bins];
    for c in &per_path {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    let samples: u64 = total.iter().sum();
    let mass = (0..n)
        .map(|j| (0..bins).map(|b| total[j * bins + b] as f64 / samples as f64).collect())
        .collect();
    Ok(InvariantHistogram { lo, hi, mass, samples })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExitTimeEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Frequency of each phase at the exit time.
    pub terminal_phase: Vec<f64>,
    /// Paths still inside at the horizon (excluded from the mean).
    pub censored: usize,
    pub n_paths: usize,
}

/// Mean time for the position to leave `(c, d)` from `(x0, i0)`. Between
/// steps, a Brownian-bridge test catches excursions the grid misses.
pub fn estimate_exit_time(
    m: &SwitchingDiffusionModel,
    x0: f64,
    i0: usize,
    (c, d): (f64, f64),
    cfg: &SimConfig,
) -> Result<ExitTimeEstimate> {
    check_paths(cfg)?;
    if !(c < x0 && x0 < d) {
        return Err(Error::OutOfDomain { x: x0, lo: c, hi: d });
    }
    let w = Walker::new(m, cfg)?;
    w.check_start(x0, i0)?;
    let h = w.step_size();
    let steps = cfg.n_steps();
    let n = m.n_phases();
    let results: Vec<Option<(f64, usize)>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(cfg.seed, p as u64);
            let mut normals = Normals::default();
            let (mut x, mut i) = (x0, i0);
            for k in 1..=steps {
                let (_, sigma) = w.drift_sigma(x, i);
                let prev = x;
                w.advance(&mut x, &mut i, &mut rng, &mut normals);
                let t = k as f64 * h;
                if x <= c || x >= d {
                    return Some((t, i));
                }
                let s2h = sigma * sigma * h;
                if s2h > 0.0 {
                    let pc = (-2.0 * (prev - c) * (x - c) / s2h).exp();
                    let pd = (-2.0 * (d - prev) * (d - x) / s2h).exp();
                    if rng.random::<f64>() < pc + pd {
                        return Some((t, i));
                    }
                }
            }
            None
        })
        .collect();
    let exited: Vec<(f64, usize)> = results.iter().flatten().copied().collect();
    let k = exited.len();
    if k < 2 {
        return Err(Error::Numeric("fewer than two paths exited before the horizon".into()));
    }
    let mean = exited.iter().map(|e| e.0).sum::<f64>() / k as f64;
    let var = exited.iter().map(|e| (e.0 - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    let mut terminal_phase = vec![0.0; n];
    for &(_, j) in &exited {
        terminal_phase[j - 1] += 1.0;
    }
    terminal_phase.iter_mut().for_each(|v| *v /= k as f64);
    Ok(ExitTimeEstimate {
        mean,
        std_error: (var / k as f64).sqrt(),
        terminal_phase,
        censored: cfg.n_paths - k,
        n_paths: cfg.n_paths,
    })
}
