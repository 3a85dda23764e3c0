//! Gauss-Jacobi quadrature and the matrix-valued inner product.
//!
//! A rule for the weight `x^alpha (1-x)^beta` on `(0, 1)` is obtained from the
//! Jacobi three-term recurrence by Golub-Welsch. The Jacobi factor of a
//! weight matrix is absorbed into the rule and only its polynomial factor is
//! evaluated at the nodes, which makes every polynomial inner product an
//! exact quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::PhaseMatrix;
use crate::poly::MatrixPolynomial;
use crate::special::beta_fn;

/// Nodes and positive weights for `int_lo^hi (x-lo)^alpha (hi-x)^beta f(x) dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alpha: f64,
    beta: f64,
    lo: f64,
    hi: f64,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.pairs().map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_matrix(&self, dim: usize, f: impl Fn(f64) -> PhaseMatrix) -> PhaseMatrix {
        self.pairs()
            .fold(PhaseMatrix::zeros(dim), |acc, (x, w)| &acc + &f(x).scale(w))
    }

    /// The same rule moved to `[lo, hi]`: the weight becomes
    /// `(x-lo)^alpha (hi-x)^beta`.
    pub fn mapped(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Empty("integration interval"));
        }
        let (l0, h0) = (self.lo, self.hi);
        let r = (hi - lo) / (h0 - l0);
        let scale = r.powf(1.0 + self.alpha + self.beta);
        Ok(Self {
            nodes: self.nodes.iter().map(|x| lo + (x - l0) * r).collect(),
            weights: self.weights.iter().map(|w| w * scale).collect(),
            alpha: self.alpha,
            beta: self.beta,
            lo,
            hi,
        })
    }
}

/// Gauss-Jacobi rule with `n_nodes` nodes for `x^alpha (1-x)^beta` on `(0, 1)`.
pub fn gauss_jacobi_rule(alpha: f64, beta: f64, n_nodes: usize) -> Result<QuadratureRule> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(invalid("alpha", format!("must exceed -1, got {alpha}")));
    }
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(invalid("beta", format!("must exceed -1, got {beta}")));
    }
    if n_nodes == 0 {
        return Err(invalid("n_nodes", "need at least one node"));
    }
    // On u in (-1, 1) with weight (1-u)^a (1+u)^b where x = (1+u)/2:
    // x^alpha pairs with (1+u), (1-x)^beta with (1-u).
    let (a, b) = (beta, alpha);
    let n = n_nodes;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let au = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        *d = 0.5 * (1.0 + au);
    }
    for (k, o) in off.iter_mut().enumerate().take(n).skip(1) {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let b2 = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0))
        };
        *o = 0.5 * b2.sqrt();
    }
    let first = tridiagonal_ql(&mut diag, &mut off)?;
    let mu0 = beta_fn(alpha + 1.0, beta + 1.0);
    let mut pairs: Vec<(f64, f64)> = diag
        .into_iter()
        .zip(first)
        .map(|(x, z)| (x, mu0 * z * z))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        alpha,
        beta,
        lo: 0.0,
        hi: 1.0,
    })
}

/// Eigenvalues of the symmetric tridiagonal matrix (`d` diagonal, `e[1..]`
/// subdiagonal) by implicit QL, returning the first component of each
/// normalized eigenvector. `d` is overwritten with the eigenvalues.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    if n == 1 {
        return Ok(z);
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numeric("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(z)
}

/// Node count sufficient for polynomial integrands of the given degree,
/// with a margin of `n_phases + 2`, rounded up to even.
pub fn default_node_count(max_degree: usize, n_phases: usize) -> usize {
    let n = max_degree + n_phases + 2;
    n + n % 2
}

/// A weight matrix of the form `x^alpha (1-x)^beta F(x)` with a matrix
/// polynomial factor `F`, defined on `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixWeight {
    alpha: f64,
    beta: f64,
    factor: MatrixPolynomial,
    #[serde(skip)]
    factor_d1: Option<MatrixPolynomial>,
    #[serde(skip)]
    factor_d2: Option<MatrixPolynomial>,
}

impl MatrixWeight {
    pub fn new(alpha: f64, beta: f64, factor: MatrixPolynomial) -> Result<Self> {
        if !(alpha > -1.0) || !(beta > -1.0) {
            return Err(invalid("weight exponents", "alpha and beta must exceed -1"));
        }
        let d1 = factor.derivative();
        let d2 = d1.derivative();
        Ok(Self {
            alpha,
            beta,
            factor,
            factor_d1: Some(d1),
            factor_d2: Some(d2),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn factor(&self) -> &MatrixPolynomial {
        &self.factor
    }

    /// Degree of the polynomial factor.
    pub fn factor_degree(&self) -> usize {
        self.factor.degree()
    }

    pub fn jacobi_factor(&self, x: f64) -> f64 {
        x.powf(self.alpha) * (1.0 - x).powf(self.beta)
    }

    pub fn eval(&self, x: f64) -> PhaseMatrix {
        self.factor.eval(x).scale(self.jacobi_factor(x))
    }

    /// `(W(x), W'(x), W''(x))`, analytically.
    pub fn eval_with_derivatives(&self, x: f64) -> [PhaseMatrix; 3] {
        let (a, b) = (self.alpha, self.beta);
        let j = self.jacobi_factor(x);
        let l = a / x - b / (1.0 - x);
        let j1 = j * l;
        let j2 = j * (l * l - a / (x * x) - b / ((1.0 - x) * (1.0 - x)));
        let f0 = self.factor.eval(x);
        let d1 = self.factor_d1.clone().unwrap_or_else(|| self.factor.derivative());
        let d2 = self.factor_d2.clone().unwrap_or_else(|| d1.derivative());
        let f1 = d1.eval(x);
        let f2 = d2.eval(x);
        let w0 = f0.scale(j);
        let w1 = &f0.scale(j1) + &f1.scale(j);
        let w2 = &(&f0.scale(j2) + &f1.scale(2.0 * j1)) + &f2.scale(j);
        [w0, w1, w2]
    }

    /// The Gauss-Jacobi rule that absorbs this weight's Jacobi factor.
    pub fn rule(&self, n_nodes: usize) -> Result<QuadratureRule> {
        gauss_jacobi_rule(self.alpha, self.beta, n_nodes)
    }

    fn check_rule(&self, rule: &QuadratureRule) -> Result<()> {
        let same = (rule.alpha - self.alpha).abs() < 1e-14
            && (rule.beta - self.beta).abs() < 1e-14
            && rule.lo == 0.0
            && rule.hi == 1.0;
        if same {
            Ok(())
        } else {
            Err(invalid(
                "rule",
                "quadrature exponents must match the weight's Jacobi factor on (0, 1)",
            ))
        }
    }
}

/// `<F, G>_W = int G^T(x) W(x) F(x) dx`, by the rule absorbing `W`'s Jacobi factor.
pub fn matrix_inner_product(
    f: &MatrixPolynomial,
    g: &MatrixPolynomial,
    weight: &MatrixWeight,
    rule: &QuadratureRule,
) -> Result<PhaseMatrix> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    weighted_inner_product(weight, rule, |x| f.eval(x), |x| g.eval(x), f.dim())
}

/// Inner product of matrix functions given pointwise.
pub fn weighted_inner_product(
    weight: &MatrixWeight,
    rule: &QuadratureRule,
    f: impl Fn(f64) -> PhaseMatrix,
    g: impl Fn(f64) -> PhaseMatrix,
    dim: usize,
) -> Result<PhaseMatrix> {
    weight.check_rule(rule)?;
    if weight.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: weight.dim(),
            found: dim,
        });
    }
    let mut acc = PhaseMatrix::zeros(dim);
    for (x, w) in rule.pairs() {
        let fx = f(x);
        let gx = g(x);
        if fx.dim() != dim || gx.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: fx.dim().max(gx.dim()),
            });
        }
        let term = &(&gx.transpose() * &weight.factor.eval(x)) * &fx;
        acc = &acc + &term.scale(w);
    }
    Ok(acc)
}

/// `(F, G) = Tr <F, G>_W`.
pub fn scalar_product(
    f: &MatrixPolynomial,
    g: &MatrixPolynomial,
    weight: &MatrixWeight,
    rule: &QuadratureRule,
) -> Result<f64> {
    Ok(matrix_inner_product(f, g, weight, rule)?.trace())
}
