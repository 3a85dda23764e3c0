//! Finite differences for `1/2 A Y'' + B Y' + Q Y + G = 0` with Dirichlet data.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::{BvpKind, BvpSolution};
use crate::error::{invalid, Error, Result};
use crate::matrix::PhaseMatrix;
use crate::model::SwitchingDiffusionModel;

pub const MIN_GRID: usize = 16;

/// Solves on an arbitrary increasing grid; `values[0]` and `values[last]`
/// are the boundary data.
pub(crate) fn solve_on_grid(
    m: &SwitchingDiffusionModel,
    grid: &[f64],
    left: &PhaseMatrix,
    right: &PhaseMatrix,
    source: Option<&dyn Fn(f64) -> PhaseMatrix>,
) -> Result<Vec<PhaseMatrix>> {
    let n_pts = grid.len();
    let n = m.n_phases();
    if n_pts < 3 {
        return Err(Error::Empty("interior grid"));
    }
    let interior = n_pts - 2;
    let mut lower = Vec::with_capacity(interior);
    let mut diag = Vec::with_capacity(interior);
    let mut upper = Vec::with_capacity(interior);
    let mut rhs = Vec::with_capacity(interior);
    for i in 1..=interior {
        let (xm, x, xp) = (grid[i - 1], grid[i], grid[i + 1]);
        let (hm, hp) = (x - xm, xp - x);
        let s = hm + hp;
        let c2 = [2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s)];
        let c1 = [-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s)];
        let a = m.diffusion(x).diagonal_vec();
        let b = m.drift(x).diagonal_vec();
        let band = |k: usize| {
            let d: Vec<f64> = (0..n).map(|r| 0.5 * a[r] * c2[k] + b[r] * c1[k]).collect();
            DMatrix::from_diagonal(&DVector::from_vec(d))
        };
        let mut r = match source {
            Some(g) => -g(x).into_inner(),
            None => DMatrix::zeros(n, n),
        };
        let (l, u) = (band(0), band(2));
        if i == 1 {
            r -= &l * left.as_dmatrix();
        }
        if i == interior {
            r -= &u * right.as_dmatrix();
        }
        lower.push(l);
        diag.push(band(1) + m.intensity(x).into_inner());
        upper.push(u);
        rhs.push(r);
    }
    let inner = block_thomas(&lower, diag, &upper, rhs)?;
    let mut out = Vec::with_capacity(n_pts);
    out.push(left.clone());
    out.extend(inner.into_iter().map(PhaseMatrix::from));
    out.push(right.clone());
    Ok(out)
}

fn condition_estimate(lu: &LU<f64, Dyn, Dyn>) -> f64 {
    let u = lu.u();
    let d: Vec<f64> = u.diagonal().iter().map(|v| v.abs()).collect();
    let max = d.iter().copied().fold(0.0, f64::max);
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Block LU for a block-tridiagonal system, eliminating downwards.
fn block_thomas(
    lower: &[DMatrix<f64>],
    mut diag: Vec<DMatrix<f64>>,
    upper: &[DMatrix<f64>],
    mut rhs: Vec<DMatrix<f64>>,
) -> Result<Vec<DMatrix<f64>>> {
    let k = diag.len();
    let mut factors: Vec<LU<f64, Dyn, Dyn>> = Vec::with_capacity(k);
    for i in 0..k {
        if i > 0 {
            let inv = factors[i - 1].try_inverse().ok_or(Error::Singular {
                index: i,
                condition: f64::INFINITY,
            })?;
            let mm = &lower[i] * inv;
            diag[i] -= &mm * &upper[i - 1];
            let upd = &mm * &rhs[i - 1];
            rhs[i] -= upd;
        }
        let lu = LU::new(diag[i].clone());
        let cond = condition_estimate(&lu);
        if !cond.is_finite() || cond > 1e14 {
            return Err(Error::Singular { index: i + 1, condition: cond });
        }
        factors.push(lu);
    }
    let mut sol = vec![DMatrix::zeros(0, 0); k];
    for i in (0..k).rev() {
        let mut r = rhs[i].clone();
        if i + 1 < k {
            r -= &upper[i] * &sol[i + 1];
        }
        sol[i] = factors[i].solve(&r).ok_or(Error::Singular {
            index: i + 1,
            condition: f64::INFINITY,
        })?;
    }
    Ok(sol)
}

pub(crate) fn check_interval(m: &SwitchingDiffusionModel, c: f64, d: f64) -> Result<()> {
    let (lo, hi) = m.interval();
    for x in [c, d] {
        if !(x > lo && x < hi) || !x.is_finite() {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
    }
    if !(c < d) {
        return Err(invalid("(c, d)", "need c < d"));
    }
    Ok(())
}

pub(crate) fn uniform_grid(c: f64, d: f64, n_grid: usize) -> Result<Vec<f64>> {
    if n_grid < MIN_GRID {
        return Err(invalid("n_grid", format!("need at least {MIN_GRID} points")));
    }
    let h = (d - c) / (n_grid - 1) as f64;
    let mut g: Vec<f64> = (0..n_grid).map(|i| c + h * i as f64).collect();
    g[n_grid - 1] = d;
    Ok(g)
}

/// Probabilities `U(x)` of reaching `d` before `c`, with entry `(i, j)` the
/// probability of arriving at `d` in phase `j` from phase `i`.
pub fn solve_hitting(m: &SwitchingDiffusionModel, c: f64, d: f64, n_grid: usize) -> Result<BvpSolution> {
    check_interval(m, c, d)?;
    let grid = uniform_grid(c, d, n_grid)?;
    let n = m.n_phases();
    let values = solve_on_grid(m, &grid, &PhaseMatrix::zeros(n), &PhaseMatrix::identity(n), None)?;
    Ok(BvpSolution::new(BvpKind::Hitting, grid, values))
}

/// Same problem with the boundary data swapped: reaching `c` before `d`.
pub fn solve_hitting_lower(m: &SwitchingDiffusionModel, c: f64, d: f64, n_grid: usize) -> Result<BvpSolution> {
    check_interval(m, c, d)?;
    let grid = uniform_grid(c, d, n_grid)?;
    let n = m.n_phases();
    let values = solve_on_grid(m, &grid, &PhaseMatrix::identity(n), &PhaseMatrix::zeros(n), None)?;
    Ok(BvpSolution::new(BvpKind::Hitting, grid, values))
}

/// `V(x)` with `1/2 A V'' + B V' + Q V + G = 0`, `V(c) = V(d) = 0`.
pub fn solve_exit_time(
    m: &SwitchingDiffusionModel,
    c: f64,
    d: f64,
    g: &dyn Fn(f64) -> PhaseMatrix,
    n_grid: usize,
) -> Result<BvpSolution> {
    check_interval(m, c, d)?;
    let grid = uniform_grid(c, d, n_grid)?;
    let n = m.n_phases();
    let probe = g(0.5 * (c + d));
    if probe.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: probe.dim(),
        });
    }
    let z = PhaseMatrix::zeros(n);
    let values = solve_on_grid(m, &grid, &z, &z, Some(g))?;
    Ok(BvpSolution::new(BvpKind::ExitTime, grid, values))
}

/// `G = e e^T`: every column of `V(x)` is then the expected exit time `E_i[T]`.
pub fn all_ones(n: usize) -> impl Fn(f64) -> PhaseMatrix {
    move |_| PhaseMatrix::ones(n)
}

/// Ratio `|Y_n - Y_2n| / |Y_2n - Y_4n|` over shared grid points for nested
/// uniform grids of `n`, `2n - 1` and `4n - 3` points. Close to 4 for a
/// second-order scheme.
pub fn richardson_ratio(solve: impl Fn(usize) -> Result<BvpSolution>, n_grid: usize) -> Result<f64> {
    let coarse = solve(n_grid)?;
    let mid = solve(2 * n_grid - 1)?;
    let fine = solve(4 * n_grid - 3)?;
    let mut d1: f64 = 0.0;
    let mut d2: f64 = 0.0;
    for i in 1..n_grid - 1 {
        d1 = d1.max(coarse.values()[i].max_abs_diff(&mid.values()[2 * i]));
        d2 = d2.max(mid.values()[2 * i].max_abs_diff(&fine.values()[4 * i]));
    }
    if d2 == 0.0 {
        return Err(Error::Numeric("refinements agree exactly; ratio undefined".into()));
    }
    Ok(d1 / d2)
}
