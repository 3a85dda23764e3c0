//! Spectral representation of the Wright-Fisher transition density.
//!
//! `P(t; x, y) = sum_n Phi_n(x) exp(t Gamma_n) Phi_n(y)^T W(y)` where the
//! matrix polynomials `Phi_n` are W-orthonormal and satisfy
//! `A Phi_n = Phi_n Gamma_n`.

mod basis;
mod invariant;
mod io;
mod residual;
mod symmetry;

pub use basis::{
    build_spectral_basis, eigenvalue_ladder, DEFAULT_TRUNCATION, DEGENERACY_TOL, NULLSPACE_RTOL,
    ORTHONORMALITY_TOL,
};
pub use invariant::{InvariantDistribution, InvariantSummary};
pub use io::BasisEntry;
pub use symmetry::{verify_symmetry_equations, SymmetryReport};

use crate::error::{invalid, Error, Result};
use crate::matrix::PhaseMatrix;
use crate::model::WrightFisherParams;
use crate::poly::MatrixPolynomial;
use crate::quadrature::{default_node_count, gauss_jacobi_rule, weighted_inner_product, MatrixWeight, QuadratureRule};

/// Truncated family `Phi_0..Phi_{M-1}` with eigenvalues `Gamma_n`.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    params: WrightFisherParams,
    eigenfunctions: Vec<MatrixPolynomial>,
    first: Vec<MatrixPolynomial>,
    second: Vec<MatrixPolynomial>,
    eigenvalues: Vec<PhaseMatrix>,
    weight: MatrixWeight,
    rule: QuadratureRule,
    degenerate: Vec<Vec<(usize, usize)>>,
}

impl SpectralBasis {
    /// Builds the basis directly from Wright-Fisher parameters.
    pub fn wright_fisher(params: &WrightFisherParams, truncation: usize) -> Result<Self> {
        basis::build_for_params(params, truncation)
    }

    /// Wraps externally supplied eigenpairs. No orthonormality check is made;
    /// see [`SpectralBasis::orthonormality_defect`].
    pub fn from_parts(
        params: WrightFisherParams,
        eigenfunctions: Vec<MatrixPolynomial>,
        eigenvalues: Vec<PhaseMatrix>,
    ) -> Result<Self> {
        params.validate()?;
        let weight = params.weight();
        let max_deg = eigenfunctions.iter().map(|p| p.degree()).max().unwrap_or(0);
        let rule = weight.rule(default_node_count(2 * max_deg + weight.factor_degree(), params.n_phases))?;
        Self::assemble(params, eigenfunctions, eigenvalues, weight, rule, Vec::new())
    }

    pub(crate) fn assemble(
        params: WrightFisherParams,
        eigenfunctions: Vec<MatrixPolynomial>,
        eigenvalues: Vec<PhaseMatrix>,
        weight: MatrixWeight,
        rule: QuadratureRule,
        degenerate: Vec<Vec<(usize, usize)>>,
    ) -> Result<Self> {
        if eigenfunctions.is_empty() {
            return Err(Error::Empty("eigenfunctions"));
        }
        if eigenfunctions.len() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenfunctions.len(),
                found: eigenvalues.len(),
            });
        }
        let n = params.n_phases;
        for d in eigenfunctions.iter().map(|p| p.dim()).chain(eigenvalues.iter().map(|g| g.dim())) {
            if d != n {
                return Err(Error::DimensionMismatch { expected: n, found: d });
            }
        }
        let first: Vec<_> = eigenfunctions.iter().map(|p| p.derivative()).collect();
        let second = first.iter().map(|p| p.derivative()).collect();
        Ok(Self {
            params,
            eigenfunctions,
            first,
            second,
            eigenvalues,
            weight,
            rule,
            degenerate,
        })
    }

    pub fn params(&self) -> &WrightFisherParams {
        &self.params
    }

    pub fn n_phases(&self) -> usize {
        self.params.n_phases
    }

    /// Number of retained eigenfunctions `M`.
    pub fn truncation(&self) -> usize {
        self.eigenfunctions.len()
    }

    pub fn eigenfunction(&self, n: usize) -> &MatrixPolynomial {
        &self.eigenfunctions[n]
    }

    pub fn eigenfunctions(&self) -> &[MatrixPolynomial] {
        &self.eigenfunctions
    }

    pub fn eigenvalue(&self, n: usize) -> &PhaseMatrix {
        &self.eigenvalues[n]
    }

    pub fn eigenvalues(&self) -> &[PhaseMatrix] {
        &self.eigenvalues
    }

    pub fn weight(&self) -> &MatrixWeight {
        &self.weight
    }

    /// Gauss-Jacobi rule exact for all products `Phi_m^T W Phi_n`.
    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Labels `(n, j)` sharing a scalar eigenvalue, one list per multiple
    /// eigenvalue met while building.
    pub fn degenerate_groups(&self) -> &[Vec<(usize, usize)>] {
        &self.degenerate
    }

    pub fn max_degree(&self) -> usize {
        self.eigenfunctions.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    /// `<Phi_n, Phi_m>_W`.
    pub fn gram(&self, n: usize, m: usize) -> Result<PhaseMatrix> {
        let (f, g) = (&self.eigenfunctions[n], &self.eigenfunctions[m]);
        weighted_inner_product(&self.weight, &self.rule, |x| f.eval(x), |x| g.eval(x), self.n_phases())
    }

    /// `max_{n,m} |<Phi_n, Phi_m>_W - delta_nm I|`.
    pub fn orthonormality_defect(&self) -> Result<f64> {
        let n_ph = self.n_phases();
        // values at nodes once, then all pairs
        let vals: Vec<Vec<PhaseMatrix>> = self.rule.nodes().iter().map(|&x| self.eval_all(x)).collect();
        let factors: Vec<PhaseMatrix> = self.rule.nodes().iter().map(|&x| self.weight.factor().eval(x)).collect();
        let mut worst: f64 = 0.0;
        for n in 0..self.truncation() {
            for m in 0..=n {
                let mut acc = PhaseMatrix::zeros(n_ph);
                for (k, w) in self.rule.weights().iter().enumerate() {
                    let t = &(&vals[k][m].transpose() * &factors[k]) * &vals[k][n];
                    acc = &acc + &t.scale(*w);
                }
                let target = if n == m { PhaseMatrix::identity(n_ph) } else { PhaseMatrix::zeros(n_ph) };
                worst = worst.max(acc.max_abs_diff(&target));
            }
        }
        Ok(worst)
    }

    pub(crate) fn eval_all(&self, x: f64) -> Vec<PhaseMatrix> {
        self.eigenfunctions.iter().map(|p| p.eval(x)).collect()
    }

    pub(crate) fn first_derivatives(&self) -> &[MatrixPolynomial] {
        &self.first
    }

    pub(crate) fn second_derivatives(&self) -> &[MatrixPolynomial] {
        &self.second
    }

    fn check_point(x: f64) -> Result<()> {
        if x > 0.0 && x < 1.0 {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x, lo: 0.0, hi: 1.0 })
        }
    }

    fn check_time(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            Err(invalid("t", "time must be positive and finite"))
        }
    }

    /// `exp(t Gamma_n)`, diagonal.
    pub(crate) fn propagator(&self, n: usize, t: f64) -> PhaseMatrix {
        let d: Vec<f64> = self.eigenvalues[n].diagonal_vec().iter().map(|g| (t * g).exp()).collect();
        PhaseMatrix::from_diagonal(&d)
    }

    /// `sum_n Phi_n(x) exp(t Gamma_n) Phi_n(y)^T`, i.e. the density without
    /// the trailing `W(y)`.
    pub(crate) fn kernel(&self, t: f64, x: f64, y: f64) -> PhaseMatrix {
        let mut acc = PhaseMatrix::zeros(self.n_phases());
        for (n, p) in self.eigenfunctions.iter().enumerate() {
            let term = &(&p.eval(x) * &self.propagator(n, t)) * &p.eval(y).transpose();
            acc = &acc + &term;
        }
        acc
    }

    /// Truncated transition density `P_M(t; x, y)`; entry `(i, j)` is the
    /// density of landing at `y` in phase `j` from `(x, i)`.
    pub fn transition_density(&self, t: f64, x: f64, y: f64) -> Result<PhaseMatrix> {
        Self::check_time(t)?;
        Self::check_point(x)?;
        Self::check_point(y)?;
        Ok(&self.kernel(t, x, y) * &self.weight.eval(y))
    }

    /// `Phi_0(x) E_11 Phi_0(y)^T W(y)`, the `t -> infinity` limit.
    pub fn stationary_limit(&self, x: f64, y: f64) -> Result<PhaseMatrix> {
        Self::check_point(x)?;
        Self::check_point(y)?;
        let n = self.n_phases();
        let e11 = PhaseMatrix::from_fn(n, |i, j| if i == 0 && j == 0 { 1.0 } else { 0.0 });
        let p = &self.eigenfunctions[0];
        Ok(&(&(&p.eval(x) * &e11) * &p.eval(y).transpose()) * &self.weight.eval(y))
    }

    /// `int_lo^hi P_M(t; x, y) dy`. The rule absorbs `y^alpha` when `lo = 0`
    /// and `(1-y)^beta` when `hi = 1`, so endpoint singularities of `W` are
    /// integrated exactly.
    pub fn transition_probability(&self, t: f64, x: f64, (lo, hi): (f64, f64)) -> Result<PhaseMatrix> {
        Self::check_time(t)?;
        Self::check_point(x)?;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
            return Err(Error::OutOfDomain {
                x: if (0.0..=1.0).contains(&lo) { hi } else { lo },
                lo: 0.0,
                hi: 1.0,
            });
        }
        if !(lo < hi) {
            return Err(Error::Empty("target interval"));
        }
        let (a, b) = (self.params.alpha, self.params.beta);
        let ra = if lo == 0.0 { a } else { 0.0 };
        let rb = if hi == 1.0 { b } else { 0.0 };
        let interior = lo > 0.0 && hi < 1.0;
        let deg = 2 * self.max_degree() + self.weight.factor_degree();
        // the remaining Jacobi factor is smooth only on interior subintervals
        let extra = if ra == a && rb == b { 0 } else if interior { 24 } else { 48 };
        let rule = gauss_jacobi_rule(ra, rb, default_node_count(deg, self.n_phases()) + extra)?.mapped(lo, hi)?;
        let n = self.n_phases();
        let mut acc = PhaseMatrix::zeros(n);
        for (y, w) in rule.pairs() {
            let rest = y.powf(a - ra) * (1.0 - y).powf(b - rb);
            let term = &self.kernel(t, x, y) * &self.weight.factor().eval(y);
            acc = &acc + &term.scale(w * rest);
        }
        Ok(acc)
    }

    /// `exp(t max_j (Gamma_M)_jj)`: size of the first omitted term.
    pub fn tail_bound(&self, t: f64) -> f64 {
        let m = self.truncation();
        let g = (1..=self.n_phases())
            .map(|j| self.params.eigenvalue(m, j))
            .fold(f64::NEG_INFINITY, f64::max);
        (t * g).exp()
    }

    /// Keeps `Phi_0..Phi_{m-1}`.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.truncation() {
            return Err(invalid("truncation", format!("must lie in 1..={}", self.truncation())));
        }
        let mut b = self.clone();
        b.eigenfunctions.truncate(m);
        b.first.truncate(m);
        b.second.truncate(m);
        b.eigenvalues.truncate(m);
        b.degenerate.retain(|g| g.iter().any(|&(n, _)| n < m));
        Ok(b)
    }

    /// Replaces `Phi_n` by `Phi_n U` and `Gamma_n` by `U^T Gamma_n U` for an
    /// orthogonal `U`. The density is unchanged when `U` commutes with
    /// `Gamma_n`.
    pub fn regauged(&self, n: usize, u: &PhaseMatrix) -> Result<Self> {
        if n >= self.truncation() {
            return Err(invalid("n", "index beyond truncation"));
        }
        if u.dim() != self.n_phases() {
            return Err(Error::DimensionMismatch {
                expected: self.n_phases(),
                found: u.dim(),
            });
        }
        let defect = (&u.transpose() * u).max_abs_diff(&PhaseMatrix::identity(u.dim()));
        if defect > 1e-10 {
            return Err(invalid("u", format!("not orthogonal (defect {defect:.2e})")));
        }
        let mut b = self.clone();
        b.eigenfunctions[n] = self.eigenfunctions[n].mul_right(u)?;
        b.first[n] = self.first[n].mul_right(u)?;
        b.second[n] = self.second[n].mul_right(u)?;
        b.eigenvalues[n] = &(&u.transpose() * &self.eigenvalues[n]) * u;
        Ok(b)
    }

    /// Copy with `(Gamma_n)_{jj}` replaced; `j` 1-based. Used to show that
    /// the residual checks detect a wrong eigenvalue.
    pub fn with_eigenvalue(&self, n: usize, j: usize, value: f64) -> Result<Self> {
        if n >= self.truncation() || j == 0 || j > self.n_phases() {
            return Err(invalid("(n, j)", "label out of range"));
        }
        let mut b = self.clone();
        b.eigenvalues[n][(j - 1, j - 1)] = value;
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(a: f64, b: f64, k: f64, n: usize, m: usize) -> SpectralBasis {
        SpectralBasis::wright_fisher(&WrightFisherParams::new(a, b, k, n).unwrap(), m).unwrap()
    }

    const PRINTED: [[f64; 4]; 4] = [
        [0.12410905, 0.08138740, 0.08920446, 0.1633878],
        [0.11006872, 0.07334748, 0.08181737, 0.1527569],
        [0.09668381, 0.06555764, 0.07453306, 0.1420720],
        [0.08394494, 0.05801744, 0.06735379, 0.1313385],
    ];

    #[test]
    fn reproduces_tabulated_probabilities() {
        let b = basis(0.0, 0.0, 0.5, 4, 12);
        let p = b.transition_probability(1.0, 0.5, (0.75, 1.0)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((p[(i, j)] - PRINTED[i][j]).abs() < 2e-7, "{i} {j}: {}", p[(i, j)]);
            }
        }
        let p3 = basis(0.0, 0.0, 0.5, 4, 3).transition_probability(1.0, 0.5, (0.75, 1.0)).unwrap();
        assert!(p3.max_abs_diff(&p) < 1e-4);
    }

    #[test]
    fn degenerate_pair_is_recorded() {
        let b = basis(0.0, 0.0, 0.5, 4, 4);
        assert!(b.degenerate_groups().iter().any(|g| g == &vec![(0, 3), (1, 1)]));
        assert!(b.orthonormality_defect().unwrap() < 1e-9);
    }

    #[test]
    fn high_truncation_stays_orthonormal() {
        let b = basis(0.5, 1.5, 0.8, 5, 20);
        assert!(b.orthonormality_defect().unwrap() < 1e-8);
    }

    #[test]
    fn full_interval_probabilities_sum_to_one() {
        let b = basis(0.3, 0.2, 0.7, 3, 10);
        let p = b.transition_probability(0.4, 0.35, (0.0, 1.0)).unwrap();
        for s in p.row_sums() {
            assert!((s - 1.0).abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let b = basis(0.0, 0.0, 0.5, 2, 3);
        assert!(b.transition_density(0.0, 0.5, 0.5).is_err());
        assert!(b.transition_density(1.0, 1.0, 0.5).is_err());
        assert!(matches!(
            b.transition_probability(1.0, 0.5, (0.4, 0.4)),
            Err(Error::Empty(_))
        ));
        assert!(b.truncated(0).is_err());
    }
}
