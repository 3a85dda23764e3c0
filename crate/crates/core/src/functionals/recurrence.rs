//! Recurrence trends from hitting and exit problems with shrinking margins.
//!
//! For margin `eps`, the lower side solves on `(a + eps, y)` and the upper
//! side on `(y, b - eps)` for a fixed interior target `y`. The return
//! probability from fixed start points tends to 1 exactly when the process
//! is recurrent; its limit is estimated by least squares over leading-order
//! forms of the deficit.

use rayon::prelude::*;
use serde::Serialize;

use super::bvp::solve_on_grid;
use crate::error::{invalid, Error, Result};
use crate::matrix::PhaseMatrix;
use crate::model::SwitchingDiffusionModel;

pub const DEFAULT_EPSILONS: [f64; 7] = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5];
const NODES_PER_SIDE: usize = 480;

/// Evidence for one side of the target.
#[derive(Debug, Clone, Serialize)]
pub struct SideTrend {
    /// `x` values the return probability is read at.
    pub starts: Vec<f64>,
    /// `1 - min_i (R e)_i` per margin.
    pub deficits: Vec<f64>,
    /// Largest entry of `V` (with `G = e e^T`) per margin.
    pub exit_max: Vec<f64>,
    /// Limit of the deficit as `eps -> 0`.
    pub extrapolated_deficit: f64,
    /// Leading-order form selected by the fit.
    pub fit: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceReport {
    pub target: f64,
    pub epsilons: Vec<f64>,
    pub lower: SideTrend,
    pub upper: SideTrend,
    /// `min (R e)` over both sides, per margin.
    pub min_return: Vec<f64>,
    pub recurrent: bool,
    pub exit_bounded: bool,
    pub positive_recurrent: bool,
    pub verdict: String,
}

/// Classifies the model on a finite interval from the trend over
/// `epsilons` (positive, strictly decreasing, at least three values).
pub fn classify_recurrence(m: &SwitchingDiffusionModel, epsilons: &[f64]) -> Result<RecurrenceReport> {
    let (a, b) = m.interval();
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("model", "recurrence classification needs a bounded interval"));
    }
    if epsilons.len() < 3 {
        return Err(invalid("epsilon_schedule", "need at least three margins"));
    }
    let width = b - a;
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) || !(epsilons[epsilons.len() - 1] > 0.0) {
        return Err(invalid("epsilon_schedule", "must be positive and strictly decreasing"));
    }
    if !(epsilons[0] < 0.1 * width) {
        return Err(invalid("epsilon_schedule", "margins must be small relative to the interval"));
    }
    let y = a + 0.5 * width;
    let lower_starts = vec![a + 0.125 * width, a + 0.25 * width];
    let upper_starts = vec![b - 0.25 * width, b - 0.125 * width];
    let n = m.n_phases();

    let per_eps: Vec<Result<[(f64, f64); 2]>> = epsilons
        .par_iter()
        .map(|&eps| {
            let lo = side(m, (a, b), a + eps, y, &lower_starts, true, n)?;
            let hi = side(m, (a, b), y, b - eps, &upper_starts, false, n)?;
            Ok([lo, hi])
        })
        .collect();
    let per_eps: Vec<[(f64, f64); 2]> = per_eps.into_iter().collect::<Result<_>>()?;

    let trend = |k: usize, starts: Vec<f64>| {
        let deficits: Vec<f64> = per_eps.iter().map(|s| s[k].0).collect();
        let exit_max: Vec<f64> = per_eps.iter().map(|s| s[k].1).collect();
        let (c0, fit) = extrapolate(epsilons, &deficits);
        SideTrend {
            starts,
            deficits,
            exit_max,
            extrapolated_deficit: c0,
            fit,
        }
    };
    let lower = trend(0, lower_starts);
    let upper = trend(1, upper_starts);
    let min_return = lower
        .deficits
        .iter()
        .zip(&upper.deficits)
        .map(|(l, u)| 1.0 - l.max(*u))
        .collect();
    let tol = 10.0 * epsilons[epsilons.len() - 1];
    let recurrent = lower.extrapolated_deficit <= tol && upper.extrapolated_deficit <= tol;
    let exit_bounded = bounded(epsilons, &lower.exit_max) && bounded(epsilons, &upper.exit_max);
    let positive_recurrent = recurrent && exit_bounded;
    let verdict = match (recurrent, positive_recurrent) {
        (true, true) => "positive recurrent",
        (true, false) => "recurrent (null trend)",
        _ => "transient (numerical)",
    }
    .to_string();
    Ok(RecurrenceReport {
        target: y,
        epsilons: epsilons.to_vec(),
        lower,
        upper,
        min_return,
        recurrent,
        exit_bounded,
        positive_recurrent,
        verdict,
    })
}

/// `(deficit, max V)` for one side and margin.
fn side(
    m: &SwitchingDiffusionModel,
    domain: (f64, f64),
    c: f64,
    d: f64,
    starts: &[f64],
    target_is_right: bool,
    n: usize,
) -> Result<(f64, f64)> {
    let (id, zero) = (PhaseMatrix::identity(n), PhaseMatrix::zeros(n));
    let (left, right) = if target_is_right { (&zero, &id) } else { (&id, &zero) };
    let ones = |_: f64| PhaseMatrix::ones(n);
    let (coarse, idx) = graded_grid(domain, c, d, starts, NODES_PER_SIDE, 1);
    let (fine, _) = graded_grid(domain, c, d, starts, NODES_PER_SIDE, 2);
    let u = richardson(
        &solve_on_grid(m, &coarse, left, right, None)?,
        &solve_on_grid(m, &fine, left, right, None)?,
    );
    let v = richardson(
        &solve_on_grid(m, &coarse, &zero, &zero, Some(&ones))?,
        &solve_on_grid(m, &fine, &zero, &zero, Some(&ones))?,
    );
    let mut deficit: f64 = 0.0;
    for &i in &idx {
        let r = u[i].row_sums();
        deficit = deficit.max(r.iter().fold(0.0_f64, |acc, s| acc.max(1.0 - s)));
    }
    let vmax = v.iter().flat_map(|m| m.iter().copied()).fold(f64::NEG_INFINITY, f64::max);
    if !vmax.is_finite() || !deficit.is_finite() {
        return Err(Error::Numeric("non-finite recurrence evidence".into()));
    }
    Ok((deficit, vmax))
}

/// `(4 fine - coarse) / 3` at the coarse nodes.
fn richardson(coarse: &[PhaseMatrix], fine: &[PhaseMatrix]) -> Vec<PhaseMatrix> {
    coarse
        .iter()
        .enumerate()
        .map(|(i, c)| (&fine[2 * i].scale(4.0) - c).scale(1.0 / 3.0))
        .collect()
}

/// Piecewise uniform grid in the logit coordinate of `domain`, with
/// breakpoints at the start points. Returns the grid and the start indices.
/// `refine = 2` halves every spacing, so coarse node `i` is fine node `2i`.
pub(crate) fn graded_grid(
    (a, b): (f64, f64),
    c: f64,
    d: f64,
    starts: &[f64],
    nodes: usize,
    refine: usize,
) -> (Vec<f64>, Vec<usize>) {
    let logit = |x: f64| {
        let t = (x - a) / (b - a);
        (t / (1.0 - t)).ln()
    };
    let inv = |z: f64| a + (b - a) / (1.0 + (-z).exp());
    let mut cuts: Vec<f64> = std::iter::once(c)
        .chain(starts.iter().copied().filter(|&s| s > c && s < d))
        .chain(std::iter::once(d))
        .collect();
    cuts.dedup();
    let zs: Vec<f64> = cuts.iter().map(|&x| logit(x)).collect();
    let total = zs[zs.len() - 1] - zs[0];
    let mut grid = vec![c];
    let mut idx = Vec::new();
    for (s, w) in zs.windows(2).enumerate() {
        let cells = (((w[1] - w[0]) / total * nodes as f64).ceil() as usize).max(2) * refine;
        for q in 1..=cells {
            let z = w[0] + (w[1] - w[0]) * q as f64 / cells as f64;
            grid.push(if q == cells { cuts[s + 1] } else { inv(z) });
        }
        if s + 2 < cuts.len() {
            idx.push((grid.len() - 1) / refine);
        }
    }
    (grid, idx)
}

/// Limit of a positive sequence as `eps -> 0`, by relative least squares
/// over two families: `c0 + c1 eps^p` (limit `c0`) and
/// `1 / (u + v eps^-p)` with `v > 0`, or `1 / (u + v ln(1/eps))` (limit 0).
/// The second family is what a divergent scale function produces.
fn extrapolate(eps: &[f64], values: &[f64]) -> (f64, String) {
    let w: Vec<f64> = values.iter().map(|v| v.abs().max(1e-300).powi(-2)).collect();
    let g: Vec<f64> = values.iter().map(|v| 1.0 / v).collect();
    let w_inv: Vec<f64> = values.iter().map(|v| v * v).collect();
    let mut best = (f64::INFINITY, 0.0, String::new());
    let mut consider = |rss: f64, limit: f64, name: String| {
        if rss < best.0 {
            best = (rss, limit, name);
        }
    };
    let divergent = |phi: &[f64], name: String| {
        // 1/v = u + c phi, relative residual 1 - v (u + c phi)
        let (u, c) = weighted_fit(phi, &g, &w_inv);
        let rss: f64 = phi.iter().zip(values).map(|(f, x)| (1.0 - x * (u + c * f)).powi(2)).sum();
        (c > 0.0).then_some((rss, name))
    };
    let log: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
    if let Some((rss, name)) = divergent(&log, "1/(u + v ln(1/eps))".into()) {
        consider(rss, 0.0, name);
    }
    for q in 1..=40 {
        let p = 0.05 * q as f64;
        let phi: Vec<f64> = eps.iter().map(|e| e.powf(p)).collect();
        let (c0, c1) = weighted_fit(&phi, values, &w);
        let rss: f64 = phi
            .iter()
            .zip(values)
            .zip(&w)
            .map(|((f, v), wi)| wi * (v - c0 - c1 * f).powi(2))
            .sum();
        consider(rss, c0, format!("c0 + c1 eps^{p:.2}"));
        let inv: Vec<f64> = eps.iter().map(|e| e.powf(-p)).collect();
        if let Some((rss, name)) = divergent(&inv, format!("1/(u + v eps^-{p:.2})")) {
            consider(rss, 0.0, name);
        }
    }
    (best.1, best.2)
}

fn weighted_fit(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, c), b)| b * (a - mx) * (c - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Growth per unit of `ln(1/eps)` over the last step is at most half of
/// that over the first step.
fn bounded(eps: &[f64], v: &[f64]) -> bool {
    let k = v.len();
    let rate = |i: usize| (v[i + 1] - v[i]) / (eps[i] / eps[i + 1]).ln();
    v.iter().all(|x| x.is_finite()) && rate(k - 2) <= 0.5 * rate(0).abs().max(1e-12)
}
