//! Polynomials with `N x N` matrix coefficients.
//!
//! Coefficients are stored either against the monomials `x^k` or against
//! shifted Chebyshev polynomials `T_k(u)`, `u = (2x - lo - hi) / (hi - lo)`.
//! The spectral module uses the Chebyshev form: eigenfunctions reach degree
//! 20 and beyond, where monomial coefficients on `[0, 1]` grow past 1e10 and
//! Horner evaluation loses most of its digits.

use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::PhaseMatrix;

/// The polynomial basis the coefficients refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolyBasis {
    Monomial,
    ShiftedChebyshev { lo: f64, hi: f64 },
}

/// A polynomial `sum_k C_k b_k(x)` with square matrix coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixPolynomial {
    coeffs: Vec<PhaseMatrix>,
    dim: usize,
    basis: PolyBasis,
}

impl MatrixPolynomial {
    /// Monomial-basis polynomial; `coeffs[k]` multiplies `x^k`.
    pub fn new(coeffs: Vec<PhaseMatrix>) -> Result<Self> {
        Self::with_basis(coeffs, PolyBasis::Monomial)
    }

    /// Shifted-Chebyshev polynomial on `[lo, hi]`; `coeffs[k]` multiplies `T_k`.
    pub fn chebyshev(coeffs: Vec<PhaseMatrix>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(crate::error::invalid("interval", "need finite lo < hi"));
        }
        Self::with_basis(coeffs, PolyBasis::ShiftedChebyshev { lo, hi })
    }

    fn with_basis(coeffs: Vec<PhaseMatrix>, basis: PolyBasis) -> Result<Self> {
        let dim = coeffs.first().ok_or(Error::Empty("polynomial coefficients"))?.dim();
        if dim == 0 {
            return Err(crate::error::invalid("dim", "phase count must be at least 1"));
        }
        if let Some(bad) = coeffs.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let mut p = Self { coeffs, dim, basis };
        p.normalize();
        Ok(p)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            coeffs: vec![PhaseMatrix::zeros(dim)],
            dim,
            basis: PolyBasis::Monomial,
        }
    }

    pub fn constant(c: PhaseMatrix) -> Self {
        Self {
            dim: c.dim(),
            coeffs: vec![c],
            basis: PolyBasis::Monomial,
        }
    }

    /// Strips trailing all-zero coefficient matrices (keeps at least one).
    pub fn normalize(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.max_abs() == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> PolyBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &[PhaseMatrix] {
        &self.coeffs
    }

    /// Degree in `x`; the zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.max_abs() == 0.0)
    }

    pub fn eval(&self, x: f64) -> PhaseMatrix {
        match self.basis {
            PolyBasis::Monomial => {
                let mut acc = PhaseMatrix::zeros(self.dim);
                for c in self.coeffs.iter().rev() {
                    acc = &acc * x + c.clone();
                }
                acc
            }
            PolyBasis::ShiftedChebyshev { lo, hi } => {
                let u = (2.0 * x - lo - hi) / (hi - lo);
                clenshaw(&self.coeffs, u, self.dim)
            }
        }
    }

    /// Derivative with respect to `x`, in the same basis.
    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n == 1 {
            return Self {
                coeffs: vec![PhaseMatrix::zeros(self.dim)],
                dim: self.dim,
                basis: self.basis,
            };
        }
        let coeffs = match self.basis {
            PolyBasis::Monomial => (1..n).map(|k| self.coeffs[k].scale(k as f64)).collect(),
            PolyBasis::ShiftedChebyshev { lo, hi } => {
                // d_{k} = d_{k+2} + 2 (k+1) c_{k+1}, then halve d_0.
                let mut d = vec![PhaseMatrix::zeros(self.dim); n + 1];
                for k in (0..n - 1).rev() {
                    d[k] = &d[k + 2] + &self.coeffs[k + 1].scale(2.0 * (k + 1) as f64);
                }
                d[0] = d[0].scale(0.5);
                d.truncate(n - 1);
                let s = 2.0 / (hi - lo);
                d.into_iter().map(|m| m.scale(s)).collect()
            }
        };
        let mut p = Self {
            coeffs,
            dim: self.dim,
            basis: self.basis,
        };
        p.normalize();
        p
    }

    /// `P(x) C` for a constant matrix `C`.
    pub fn mul_right(&self, c: &PhaseMatrix) -> Result<Self> {
        self.check_dim(c.dim())?;
        let mut p = Self {
            coeffs: self.coeffs.iter().map(|m| m * c).collect(),
            dim: self.dim,
            basis: self.basis,
        };
        p.normalize();
        Ok(p)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self {
            coeffs: self.coeffs.iter().map(|m| m.scale(s)).collect(),
            dim: self.dim,
            basis: self.basis,
        };
        p.normalize();
        p
    }

    /// Sum of two polynomials sharing dimension and basis.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        if self.basis != other.basis {
            return Err(crate::error::invalid("basis", "cannot add polynomials in different bases"));
        }
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = PhaseMatrix::zeros(self.dim);
        let coeffs = (0..len)
            .map(|k| {
                let a = self.coeffs.get(k).unwrap_or(&zero);
                let b = other.coeffs.get(k).unwrap_or(&zero);
                a + b
            })
            .collect();
        let mut p = Self {
            coeffs,
            dim: self.dim,
            basis: self.basis,
        };
        p.normalize();
        Ok(p)
    }

    /// Re-expresses the polynomial against monomials `x^k`.
    pub fn to_monomial(&self) -> Self {
        match self.basis {
            PolyBasis::Monomial => self.clone(),
            PolyBasis::ShiftedChebyshev { lo, hi } => {
                let n = self.coeffs.len();
                // T_k(u) in powers of u via the three-term recurrence.
                let mut t_prev = vec![1.0];
                let mut t_cur = vec![0.0, 1.0];
                let mut in_u = vec![PhaseMatrix::zeros(self.dim); n];
                for (k, c) in self.coeffs.iter().enumerate() {
                    let tk: &[f64] = match k {
                        0 => &t_prev,
                        1 => &t_cur,
                        _ => {
                            let mut next = vec![0.0; k + 1];
                            for (i, v) in t_cur.iter().enumerate() {
                                next[i + 1] += 2.0 * v;
                            }
                            for (i, v) in t_prev.iter().enumerate() {
                                next[i] -= v;
                            }
                            t_prev = std::mem::replace(&mut t_cur, next);
                            &t_cur
                        }
                    };
                    for (i, v) in tk.iter().enumerate() {
                        in_u[i] = &in_u[i] + &c.scale(*v);
                    }
                }
                // u = a x + b
                let a = 2.0 / (hi - lo);
                let b = -(lo + hi) / (hi - lo);
                let mut out = vec![PhaseMatrix::zeros(self.dim); n];
                let mut pow = vec![1.0]; // coefficients of (a x + b)^i in x
                for ci in in_u.iter() {
                    for (m, v) in pow.iter().enumerate() {
                        out[m] = &out[m] + &ci.scale(*v);
                    }
                    let mut next = vec![0.0; pow.len() + 1];
                    for (m, v) in pow.iter().enumerate() {
                        next[m] += b * v;
                        next[m + 1] += a * v;
                    }
                    pow = next;
                }
                let mut p = Self {
                    coeffs: out,
                    dim: self.dim,
                    basis: PolyBasis::Monomial,
                };
                p.normalize();
                p
            }
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: d,
            });
        }
        Ok(())
    }
}

impl Add for &MatrixPolynomial {
    type Output = MatrixPolynomial;
    /// Panics on dimension or basis mismatch; see [`MatrixPolynomial::try_add`].
    fn add(self, rhs: &MatrixPolynomial) -> MatrixPolynomial {
        self.try_add(rhs).expect("incompatible polynomials")
    }
}

/// Evaluates `sum_k p.coeffs[k] x^k` (or the Chebyshev analogue).
pub fn eval_matrix_polynomial(p: &MatrixPolynomial, x: f64) -> PhaseMatrix {
    p.eval(x)
}

fn clenshaw(coeffs: &[PhaseMatrix], u: f64, dim: usize) -> PhaseMatrix {
    let mut b1 = PhaseMatrix::zeros(dim);
    let mut b2 = PhaseMatrix::zeros(dim);
    for c in coeffs.iter().skip(1).rev() {
        let b0 = &(&b1 * (2.0 * u) - b2) + c;
        b2 = b1;
        b1 = b0;
    }
    &(&b1 * u - b2) + &coeffs[0]
}

/// Values of `T_0..T_deg` at `u`.
pub(crate) fn chebyshev_values(deg: usize, u: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(deg + 1);
    t.push(1.0);
    if deg >= 1 {
        t.push(u);
    }
    for k in 2..=deg {
        let v = 2.0 * u * t[k - 1] - t[k - 2];
        t.push(v);
    }
    t
}

/// Values, first and second `u`-derivatives of `T_0..T_deg` at `u`.
pub(crate) fn chebyshev_values_with_derivatives(deg: usize, u: f64) -> [Vec<f64>; 3] {
    let t = chebyshev_values(deg, u);
    let mut d1 = vec![0.0; deg + 1];
    let mut d2 = vec![0.0; deg + 1];
    if deg >= 1 {
        d1[1] = 1.0;
    }
    // T_k' = 2 T_{k-1} + 2u T_{k-1}' - T_{k-2}';  T_k'' = 4 T_{k-1}' + 2u T_{k-1}'' - T_{k-2}''
    for k in 2..=deg {
        d1[k] = 2.0 * t[k - 1] + 2.0 * u * d1[k - 1] - d1[k - 2];
        d2[k] = 4.0 * d1[k - 1] + 2.0 * u * d2[k - 1] - d2[k - 2];
    }
    [t, d1, d2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(v: f64) -> PhaseMatrix {
        PhaseMatrix::from_rows(&[vec![v]])
    }

    #[test]
    fn identity_constant_evaluates_to_identity() {
        let p = MatrixPolynomial::new(vec![PhaseMatrix::identity(3)]).unwrap();
        assert_eq!(p.eval(0.7), PhaseMatrix::identity(3));
    }

    #[test]
    fn linear_monomial() {
        let p = MatrixPolynomial::new(vec![PhaseMatrix::zeros(2), PhaseMatrix::identity(2)]).unwrap();
        assert_eq!(eval_matrix_polynomial(&p, 0.5), PhaseMatrix::identity(2).scale(0.5));
    }

    #[test]
    fn scalar_quadratic_by_hand() {
        let p = MatrixPolynomial::new(vec![scalar(1.0), scalar(2.0), scalar(3.0)]).unwrap();
        assert_eq!(p.eval(2.0)[(0, 0)], 17.0);
    }

    #[test]
    fn normalize_strips_trailing_zeros() {
        let p = MatrixPolynomial::new(vec![scalar(1.0), scalar(0.0), scalar(0.0)]).unwrap();
        assert_eq!(p.degree(), 0);
        let z = MatrixPolynomial::new(vec![scalar(0.0), scalar(0.0)]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.degree(), 0);
    }

    #[test]
    fn mismatched_coefficients_rejected() {
        let err = MatrixPolynomial::new(vec![PhaseMatrix::identity(2), PhaseMatrix::identity(3)]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        assert!(MatrixPolynomial::new(vec![]).is_err());
    }

    #[test]
    fn chebyshev_matches_monomial_conversion() {
        let c: Vec<PhaseMatrix> = (0..7)
            .map(|k| PhaseMatrix::from_rows(&[vec![1.0 / (k as f64 + 1.0), -0.3], vec![0.2 * k as f64, 1.0]]))
            .collect();
        let p = MatrixPolynomial::chebyshev(c, 0.0, 1.0).unwrap();
        let m = p.to_monomial();
        for &x in &[0.0, 0.13, 0.5, 0.91, 1.0] {
            assert!(p.eval(x).max_abs_diff(&m.eval(x)) < 1e-12);
        }
        let dp = p.derivative();
        let dm = m.derivative();
        for &x in &[0.05, 0.4, 0.77] {
            assert!(dp.eval(x).max_abs_diff(&dm.eval(x)) < 1e-10);
        }
    }

    #[test]
    fn chebyshev_basis_derivatives_match_polynomial_derivatives() {
        let deg = 9;
        let u = 0.37;
        let [t, d1, d2] = chebyshev_values_with_derivatives(deg, u);
        for k in 0..=deg {
            let mut c = vec![PhaseMatrix::zeros(1); k + 1];
            c[k] = scalar(1.0);
            let p = MatrixPolynomial::chebyshev(c, -1.0, 1.0).unwrap();
            assert!((p.eval(u)[(0, 0)] - t[k]).abs() < 1e-13);
            assert!((p.derivative().eval(u)[(0, 0)] - d1[k]).abs() < 1e-11);
            assert!((p.derivative().derivative().eval(u)[(0, 0)] - d2[k]).abs() < 1e-9);
        }
    }

    fn arb_poly(dim: usize) -> impl Strategy<Value = MatrixPolynomial> {
        prop::collection::vec(prop::collection::vec(-2.0f64..2.0, dim * dim), 1..6).prop_map(move |cs| {
            let coeffs = cs
                .into_iter()
                .map(|v| PhaseMatrix::from_fn(dim, |i, j| v[i * dim + j]))
                .collect();
            MatrixPolynomial::new(coeffs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn evaluation_is_linear(p in arb_poly(2), q in arb_poly(2), x in -1.5f64..1.5) {
            let lhs = (&p + &q).eval(x);
            let rhs = &p.eval(x) + &q.eval(x);
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        }
    }
}
