//! Orthonormal matrix eigenfunctions of the Wright-Fisher generator.
//!
//! For a scalar eigenvalue `gamma = (Gamma_n)_{jj}` the vector eigenfunction
//! `f` solves `1/2 A f'' + B f' + Q f = gamma f`. Multiplying by `(1-x)`
//! clears the pole of `Q` and leaves a polynomial identity of degree
//! `deg f + 1`, which holds iff it holds at `deg f + 2` distinct points. We
//! collocate at Chebyshev-Lobatto points, with `f` expanded in shifted
//! Chebyshev polynomials, and take the nullspace of the resulting matrix by
//! SVD.
//!
//! Scalar eigenvalues can coincide across `(n, j)` labels (e.g. `Gamma_0`
//! entry 3 and `Gamma_1` entry 1 for `N = 4, alpha = beta = 0, k = 1/2`).
//! Such labels are solved together and the joint eigenspace is
//! orthonormalized as a block.

use nalgebra::{DMatrix, DVector, SVD};

use super::SpectralBasis;
use crate::error::{Error, Result};
use crate::matrix::PhaseMatrix;
use crate::model::{SwitchingDiffusionModel, WrightFisherParams};
use crate::poly::{chebyshev_values, chebyshev_values_with_derivatives, MatrixPolynomial};
use crate::quadrature::{default_node_count, QuadratureRule};

/// Relative SVD threshold for the nullspace.
pub const NULLSPACE_RTOL: f64 = 1e-10;
/// Scalar eigenvalues closer than this (relative to `max(1, |gamma|)`) are
/// treated as one eigenspace.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Orthonormality defect accepted by the builder.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;
/// Default truncation.
pub const DEFAULT_TRUNCATION: usize = 12;

/// `Gamma_n` for the Wright-Fisher family.
pub fn eigenvalue_ladder(p: &WrightFisherParams, n: usize) -> PhaseMatrix {
    p.eigenvalue_matrix(n)
}

/// Builds `Phi_0..Phi_{M-1}` for a Wright-Fisher model.
pub fn build_spectral_basis(model: &SwitchingDiffusionModel, truncation: usize) -> Result<SpectralBasis> {
    let params = *model.wright_fisher_params().ok_or(Error::NotWrightFisher)?;
    build_for_params(&params, truncation)
}

pub(crate) fn build_for_params(p: &WrightFisherParams, truncation: usize) -> Result<SpectralBasis> {
    p.validate()?;
    if truncation == 0 {
        return Err(crate::error::invalid("truncation", "need at least one eigenfunction"));
    }
    let n_ph = p.n_phases;
    let groups = eigenvalue_groups(p, truncation);
    // Degree budget for the rule: largest retry degree over all groups.
    let max_deg = groups.iter().map(|g| g.degree + 1).max().unwrap_or(n_ph);
    let weight = p.weight();
    let rule = weight.rule(default_node_count(2 * max_deg + weight.factor_degree(), n_ph))?;
    let gram = GramEvaluator::new(p, &rule, max_deg);

    // columns[n][j] = coefficient vector (layout d * N + i)
    let mut columns: Vec<Vec<Option<DVector<f64>>>> = vec![vec![None; n_ph]; truncation];
    let mut degenerate = Vec::new();
    for g in &groups {
        let vecs = solve_group(p, g)?;
        let ordered = order_by_degree(vecs);
        let ortho = gram.orthonormalize(ordered)?;
        if g.members.len() > 1 {
            degenerate.push(g.members.clone());
        }
        for (&(n, j), mut v) in g.members.iter().zip(ortho) {
            fix_sign(&mut v, n_ph);
            if n < truncation {
                columns[n][j - 1] = Some(v);
            }
        }
    }

    let mut eigenfunctions = Vec::with_capacity(truncation);
    for (n, cols) in columns.into_iter().enumerate() {
        let cols: Vec<DVector<f64>> = cols
            .into_iter()
            .enumerate()
            .map(|(j, c)| {
                c.ok_or_else(|| Error::Numeric(format!("eigenfunction ({n}, {}) was not produced", j + 1)))
            })
            .collect::<Result<_>>()?;
        eigenfunctions.push(assemble(&cols, n_ph)?);
    }
    let eigenvalues = (0..truncation).map(|n| p.eigenvalue_matrix(n)).collect();
    let basis = SpectralBasis::assemble(*p, eigenfunctions, eigenvalues, weight, rule, degenerate)?;
    let defect = basis.orthonormality_defect()?;
    if defect > ORTHONORMALITY_TOL {
        return Err(Error::Orthonormality {
            defect,
            tolerance: ORTHONORMALITY_TOL,
        });
    }
    Ok(basis)
}

#[derive(Debug, Clone)]
pub(crate) struct EigenGroup {
    pub gamma: f64,
    /// `(n, j)` labels, `j` 1-based, sorted.
    pub members: Vec<(usize, usize)>,
    /// Degree bound `max(n) + N - 1`.
    pub degree: usize,
}

fn same_eigenvalue(a: f64, b: f64) -> bool {
    (a - b).abs() <= DEGENERACY_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Groups the labels `(n, j)`, `n < truncation`, by scalar eigenvalue. A
/// group may pull in labels with `n >= truncation`.
pub(crate) fn eigenvalue_groups(p: &WrightFisherParams, truncation: usize) -> Vec<EigenGroup> {
    let n_ph = p.n_phases;
    let mut assigned = vec![vec![false; n_ph + 1]; truncation];
    let mut groups = Vec::new();
    for n in 0..truncation {
        for j in 1..=n_ph {
            if assigned[n][j] {
                continue;
            }
            let gamma = p.eigenvalue(n, j);
            let mut members = Vec::new();
            // Each diagonal entry decreases strictly in n for n >= 1.
            let mut m = 0;
            loop {
                let row_max = (1..=n_ph).map(|i| p.eigenvalue(m, i)).fold(f64::NEG_INFINITY, f64::max);
                for i in 1..=n_ph {
                    if same_eigenvalue(p.eigenvalue(m, i), gamma) {
                        members.push((m, i));
                    }
                }
                if m >= 1 && row_max < gamma - DEGENERACY_TOL * gamma.abs().max(1.0) {
                    break;
                }
                m += 1;
            }
            members.sort_unstable();
            for &(a, b) in &members {
                if a < truncation {
                    assigned[a][b] = true;
                }
            }
            let degree = members.iter().map(|&(a, _)| a).max().unwrap_or(n) + n_ph - 1;
            groups.push(EigenGroup { gamma, members, degree });
        }
    }
    groups
}

/// Collocation matrix of `v -> (1-x)(1/2 A f'' + B f' + Q f - gamma f)` at
/// `degree + 2` Chebyshev-Lobatto points of `[0, 1]`.
fn collocation_matrix(p: &WrightFisherParams, gamma: f64, degree: usize) -> DMatrix<f64> {
    let n_ph = p.n_phases;
    let n_pts = degree + 2;
    let mut a = DMatrix::zeros(n_ph * n_pts, n_ph * (degree + 1));
    let (q0, q1) = p.cleared_intensity();
    for r in 0..n_pts {
        let u = -(std::f64::consts::PI * r as f64 / (n_pts - 1) as f64).cos();
        let x = 0.5 * (u + 1.0);
        let [t, d1, d2] = chebyshev_values_with_derivatives(degree, u);
        // d/dx = 2 d/du on [0, 1]
        let omx = 1.0 - x;
        let half_a = x * (1.0 - x);
        for i in 0..n_ph {
            let row = r * n_ph + i;
            let tau = p.drift_entry(i + 1, x);
            for d in 0..=degree {
                let col = d * n_ph + i;
                let scalar = omx * (half_a * 4.0 * d2[d] + tau * 2.0 * d1[d] - gamma * t[d]);
                a[(row, col)] += scalar;
                for c in 0..n_ph {
                    let qc = q0[(i, c)] + x * q1[(i, c)];
                    if qc != 0.0 {
                        a[(row, d * n_ph + c)] += qc * t[d];
                    }
                }
            }
        }
    }
    a
}

fn nullspace(a: DMatrix<f64>) -> Vec<DVector<f64>> {
    // tall matrix: V^T is square, singular values sorted descending
    let svd = SVD::new(a, false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.expect("requested V^T");
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > NULLSPACE_RTOL * smax).count();
    (rank..v_t.nrows()).map(|r| v_t.row(r).transpose()).collect()
}

fn solve_group(p: &WrightFisherParams, g: &EigenGroup) -> Result<Vec<DVector<f64>>> {
    let want = g.members.len();
    let mut found = 0;
    let mut degree = g.degree;
    for attempt in 0..2 {
        degree = g.degree + attempt;
        let ns = nullspace(collocation_matrix(p, g.gamma, degree));
        found = ns.len();
        if found == want {
            return Ok(ns);
        }
        if found > want {
            break;
        }
    }
    Err(Error::Nullspace {
        eigenvalue: g.gamma,
        degree,
        expected: want,
        found,
    })
}

/// Reorders a basis of an eigenspace so the first vectors have the lowest
/// degree: eliminates from the highest coefficient downwards.
fn order_by_degree(mut pending: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    if pending.len() <= 1 {
        return pending;
    }
    let len = pending[0].len();
    let mut pivots = Vec::new();
    for row in (0..len).rev() {
        if pending.len() <= 1 {
            break;
        }
        let (best, mag) = pending
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v[row].abs() / v.norm()))
            .fold((0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if mag <= 1e-9 {
            continue;
        }
        let piv = pending.remove(best);
        for v in pending.iter_mut() {
            let f = v[row] / piv[row];
            *v -= &piv * f;
            v[row] = 0.0;
        }
        pivots.push(piv);
    }
    pivots.reverse();
    pending.extend(pivots);
    pending
}

/// Makes the largest entry of the highest nonzero degree positive.
fn fix_sign(v: &mut DVector<f64>, n_ph: usize) {
    let scale = v.amax();
    let n_deg = v.len() / n_ph;
    for d in (0..n_deg).rev() {
        let block = v.rows(d * n_ph, n_ph);
        let m = block.iter().fold(0.0_f64, |acc, &x| if x.abs() > acc.abs() { x } else { acc });
        if m.abs() > 1e-10 * scale {
            if m < 0.0 {
                v.neg_mut();
            }
            return;
        }
    }
}

/// Evaluates vector polynomials and their W-inner products at rule nodes.
struct GramEvaluator {
    /// `cheb[k][d] = T_d(u_k)`
    cheb: Vec<Vec<f64>>,
    /// `factor[k][i]`: diagonal of `H x^J` at node k, times the rule weight.
    factor: Vec<Vec<f64>>,
    n_ph: usize,
}

impl GramEvaluator {
    fn new(p: &WrightFisherParams, rule: &QuadratureRule, max_deg: usize) -> Self {
        let w = p.weight();
        let cheb = rule
            .nodes()
            .iter()
            .map(|&x| chebyshev_values(max_deg, 2.0 * x - 1.0))
            .collect();
        let factor = rule
            .pairs()
            .map(|(x, wt)| w.factor().eval(x).diagonal_vec().into_iter().map(|v| v * wt).collect())
            .collect();
        Self {
            cheb,
            factor,
            n_ph: p.n_phases,
        }
    }

    fn values(&self, v: &DVector<f64>) -> Vec<Vec<f64>> {
        let n_deg = v.len() / self.n_ph;
        self.cheb
            .iter()
            .map(|t| {
                (0..self.n_ph)
                    .map(|i| (0..n_deg).map(|d| v[d * self.n_ph + i] * t[d]).sum())
                    .collect()
            })
            .collect()
    }

    fn inner(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.factor)
            .map(|((fa, fb), h)| (0..self.n_ph).map(|i| fa[i] * h[i] * fb[i]).sum::<f64>())
            .sum()
    }

    /// Modified Gram-Schmidt in the W-inner product, applied twice.
    fn orthonormalize(&self, vecs: Vec<DVector<f64>>) -> Result<Vec<DVector<f64>>> {
        let mut out: Vec<(DVector<f64>, Vec<Vec<f64>>)> = Vec::with_capacity(vecs.len());
        for mut v in vecs {
            for _ in 0..2 {
                for (u, uv) in &out {
                    let c = self.inner(&self.values(&v), uv);
                    v -= u * c;
                }
            }
            let vals = self.values(&v);
            let nrm2 = self.inner(&vals, &vals);
            if !(nrm2 > 0.0) {
                return Err(Error::Numeric("eigenfunction has zero W-norm".into()));
            }
            let s = nrm2.sqrt().recip();
            v *= s;
            let vals = self.values(&v);
            out.push((v, vals));
        }
        Ok(out.into_iter().map(|(v, _)| v).collect())
    }
}

/// Packs column coefficient vectors into a Chebyshev matrix polynomial.
fn assemble(cols: &[DVector<f64>], n_ph: usize) -> Result<MatrixPolynomial> {
    let n_deg = cols.iter().map(|c| c.len() / n_ph).max().unwrap_or(1);
    let coeffs = (0..n_deg)
        .map(|d| {
            PhaseMatrix::from_fn(n_ph, |i, j| {
                let c = &cols[j];
                if (d + 1) * n_ph <= c.len() {
                    c[d * n_ph + i]
                } else {
                    0.0
                }
            })
        })
        .collect();
    MatrixPolynomial::chebyshev(coeffs, 0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_phase_groups_pair_up_degenerate_labels() {
        let p = WrightFisherParams::new(0.0, 0.0, 0.5, 4).unwrap();
        let g = eigenvalue_groups(&p, 3);
        let g5 = g.iter().find(|g| g.gamma == -5.0).unwrap();
        assert_eq!(g5.members, vec![(0, 3), (1, 1)]);
        assert_eq!(g5.degree, 4);
        // every label below the truncation appears exactly once
        let mut seen: Vec<(usize, usize)> = g.iter().flat_map(|g| g.members.clone()).filter(|m| m.0 < 3).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 12);
    }

    #[test]
    fn generic_parameters_have_simple_spectrum() {
        let p = WrightFisherParams::new(0.3, 0.7, 0.45, 3).unwrap();
        assert!(eigenvalue_groups(&p, 6).iter().all(|g| g.members.len() == 1));
    }

    #[test]
    fn constant_vector_spans_zero_eigenspace() {
        let p = WrightFisherParams::new(1.0, 1.0, 0.5, 3).unwrap();
        let g = &eigenvalue_groups(&p, 1)[0];
        assert_eq!(g.gamma, 0.0);
        let ns = solve_group(&p, g).unwrap();
        assert_eq!(ns.len(), 1);
        let ordered = order_by_degree(ns);
        let v = &ordered[0];
        // T_0 block carries everything, components equal
        assert!(v.rows(3, v.len() - 3).amax() < 1e-10);
        assert!((v[0] - v[1]).abs() < 1e-10 && (v[1] - v[2]).abs() < 1e-10);
    }

    #[test]
    fn degree_ordering_puts_low_degree_first() {
        let a = DVector::from_vec(vec![1.0, 0.0, 2.0, 0.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![0.0, 1.0, 1.0, 3.0, 0.0, 0.0]);
        let c = a.clone() * 2.0 + b.clone();
        let ordered = order_by_degree(vec![c, a]);
        // first vector has zero top block
        assert!(ordered[0][4].abs() < 1e-14 && ordered[0][5].abs() < 1e-14);
    }
}
