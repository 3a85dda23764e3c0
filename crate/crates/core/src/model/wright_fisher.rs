//! Wright-Fisher mutation model with `N` phases.
//!
//! On `(0, 1)`: `A(x) = 2x(1-x) I`, drift `tau_i(x) = alpha+1+N-i - x(alpha+beta+2+N-i)`,
//! and a tridiagonal birth-death intensity with forward rates
//! `lambda_i(x) = (N-i)(i+beta-k)/(1-x)` and backward rates
//! `mu_i(x) = x(i-1)(N-i+k)/(1-x)`. The weight
//! `W(x) = x^alpha (1-x)^beta diag(omega_i x^(N-i))` makes the generator
//! self-adjoint. Phases are 1-based in the formulas and 0-based in storage.

use serde::{Deserialize, Serialize};

use super::{CoefficientDerivatives, SwitchingDiffusionModel};
use crate::error::{invalid, Result};
use crate::matrix::PhaseMatrix;
use crate::poly::MatrixPolynomial;
use crate::quadrature::MatrixWeight;
use crate::special::generalized_binomial;

/// `Q(x)` is evaluated at `min(x, 1 - Q_CLAMP_EPS)`.
pub const Q_CLAMP_EPS: f64 = 1e-12;

/// Parameters `(alpha, beta, k, N)` with `alpha, beta > -1`, `0 < k < beta + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WrightFisherParams {
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
    #[serde(rename = "phases")]
    pub n_phases: usize,
}

impl WrightFisherParams {
    pub fn new(alpha: f64, beta: f64, k: f64, n_phases: usize) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            k,
            n_phases,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_phases == 0 {
            return Err(invalid("phases", "N must be a positive integer"));
        }
        if !(self.alpha > -1.0) || !self.alpha.is_finite() {
            return Err(invalid("alpha", format!("constraint alpha > -1 violated (alpha = {})", self.alpha)));
        }
        if !(self.beta > -1.0) || !self.beta.is_finite() {
            return Err(invalid("beta", format!("constraint beta > -1 violated (beta = {})", self.beta)));
        }
        if !(self.k > 0.0 && self.k < self.beta + 1.0) {
            return Err(invalid(
                "k",
                format!(
                    "constraint 0 < k < beta + 1 violated (k = {}, beta + 1 = {})",
                    self.k,
                    self.beta + 1.0
                ),
            ));
        }
        Ok(())
    }

    fn nf(&self) -> f64 {
        self.n_phases as f64
    }

    /// Constant part `(N-i)(i+beta-k)` of the forward rate, phase `i` 1-based.
    pub fn forward_numerator(&self, i: usize) -> f64 {
        let i = i as f64;
        (self.nf() - i) * (i + self.beta - self.k)
    }

    /// Constant part `(i-1)(N-i+k)` of the backward rate, phase `i` 1-based.
    pub fn backward_numerator(&self, i: usize) -> f64 {
        let i = i as f64;
        (i - 1.0) * (self.nf() - i + self.k)
    }

    /// `lambda_i(x)`, phase `i` 1-based.
    pub fn lambda(&self, i: usize, x: f64) -> f64 {
        self.forward_numerator(i) / (1.0 - x)
    }

    /// `mu_i(x)`, phase `i` 1-based.
    pub fn mu(&self, i: usize, x: f64) -> f64 {
        x * self.backward_numerator(i) / (1.0 - x)
    }

    /// Hahn weights `omega_1..omega_N`.
    pub fn hahn_weights(&self) -> Vec<f64> {
        let n = self.n_phases;
        (1..=n)
            .map(|i| {
                generalized_binomial(self.beta - self.k + i as f64 - 1.0, (i - 1) as u32)
                    * generalized_binomial(self.nf() + self.k - i as f64 - 1.0, (n - i) as u32)
            })
            .collect()
    }

    /// Drift `tau_i(x)`, phase `i` 1-based.
    pub fn drift_entry(&self, i: usize, x: f64) -> f64 {
        let c = self.nf() - i as f64;
        self.alpha + 1.0 + c - x * (self.alpha + self.beta + 2.0 + c)
    }

    pub fn diffusion(&self, x: f64) -> PhaseMatrix {
        PhaseMatrix::identity(self.n_phases).scale(2.0 * x * (1.0 - x))
    }

    pub fn drift(&self, x: f64) -> PhaseMatrix {
        let d: Vec<f64> = (1..=self.n_phases).map(|i| self.drift_entry(i, x)).collect();
        PhaseMatrix::from_diagonal(&d)
    }

    /// `(Q0, Q1)` with `(1-x) Q(x) = Q0 + x Q1`.
    pub fn cleared_intensity(&self) -> (PhaseMatrix, PhaseMatrix) {
        let n = self.n_phases;
        let mut q0 = PhaseMatrix::zeros(n);
        let mut q1 = PhaseMatrix::zeros(n);
        for i in 1..=n {
            let r = i - 1;
            let l = self.forward_numerator(i);
            let m = self.backward_numerator(i);
            q0[(r, r)] = -l;
            q1[(r, r)] = -m;
            if i < n {
                q0[(r, r + 1)] = l;
            }
            if i > 1 {
                q1[(r, r - 1)] = m;
            }
        }
        (q0, q1)
    }

    pub fn intensity(&self, x: f64) -> PhaseMatrix {
        let x = x.min(1.0 - Q_CLAMP_EPS);
        let (q0, q1) = self.cleared_intensity();
        (&q0 + &q1.scale(x)).scale(1.0 / (1.0 - x))
    }

    pub fn derivatives(&self, x: f64) -> CoefficientDerivatives {
        let n = self.n_phases;
        let b1: Vec<f64> = (1..=n)
            .map(|i| -(self.alpha + self.beta + 2.0 + self.nf() - i as f64))
            .collect();
        CoefficientDerivatives {
            diffusion_d1: PhaseMatrix::identity(n).scale(2.0 - 4.0 * x),
            diffusion_d2: PhaseMatrix::identity(n).scale(-4.0),
            drift_d1: PhaseMatrix::from_diagonal(&b1),
        }
    }

    /// `W(x) = x^alpha (1-x)^beta H x^J`.
    pub fn weight(&self) -> MatrixWeight {
        let n = self.n_phases;
        let omega = self.hahn_weights();
        let coeffs = (0..n)
            .map(|d| {
                // x^(N-i) = x^d  <=>  i = N - d
                PhaseMatrix::from_fn(n, |r, c| if r == c && n - 1 - r == d { omega[r] } else { 0.0 })
            })
            .collect();
        let factor = MatrixPolynomial::new(coeffs).expect("non-empty square coefficients");
        MatrixWeight::new(self.alpha, self.beta, factor).expect("validated exponents")
    }

    /// Scalar eigenvalue `(Gamma_n)_{jj}`, phase `j` 1-based.
    pub fn eigenvalue(&self, n: usize, j: usize) -> f64 {
        let (n, j) = (n as f64, j as f64);
        let (a, b, k, nn) = (self.alpha, self.beta, self.k, self.nf());
        -n * n - n * (a + b + nn + j - 1.0) - (j - 1.0) * (a + b - k + j)
    }

    /// `Gamma_n = -n^2 I - n((alpha+beta+N) I + J') - J'((alpha+beta-k+1) I + J')`
    /// with `J' = diag(0, 1, ..., N-1)`.
    pub fn eigenvalue_matrix(&self, n: usize) -> PhaseMatrix {
        let d: Vec<f64> = (1..=self.n_phases).map(|j| self.eigenvalue(n, j)).collect();
        PhaseMatrix::from_diagonal(&d)
    }
}

/// The Wright-Fisher model on `(0, 1)` with analytic derivatives and weight.
pub fn wright_fisher_model(p: WrightFisherParams) -> Result<SwitchingDiffusionModel> {
    p.validate()?;
    SwitchingDiffusionModel::builder(p.n_phases, (0.0, 1.0))
        .name(format!(
            "wright_fisher(alpha={}, beta={}, k={}, N={})",
            p.alpha, p.beta, p.k, p.n_phases
        ))
        .diffusion(move |x| p.diffusion(x))
        .drift(move |x| p.drift(x))
        .intensity(move |x| p.intensity(x))
        .derivatives(move |x| p.derivatives(x))
        .weight(p.weight())
        .wright_fisher(p)
        .build()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Absorbing,
    Reflecting,
}

/// Boundary behavior at 0 and 1 for each phase (index 0 = phase 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub at_zero: Vec<BoundaryKind>,
    pub at_one: Vec<BoundaryKind>,
}

impl BoundaryReport {
    pub fn zero_absorbing_phases(&self) -> Vec<usize> {
        absorbing(&self.at_zero)
    }

    pub fn one_absorbing_phases(&self) -> Vec<usize> {
        absorbing(&self.at_one)
    }
}

fn absorbing(v: &[BoundaryKind]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, k)| **k == BoundaryKind::Absorbing)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Boundary 1 is absorbing in every phase iff `beta < 0`; boundary 0 is
/// absorbing iff `alpha < 0`, and then only in phase `N` (the other phases
/// carry drift `alpha + N - i > 0` at the origin).
pub fn classify_boundaries(p: &WrightFisherParams) -> BoundaryReport {
    let n = p.n_phases;
    let one = if p.beta < 0.0 {
        BoundaryKind::Absorbing
    } else {
        BoundaryKind::Reflecting
    };
    let at_zero = (1..=n)
        .map(|i| {
            if p.alpha < 0.0 && i == n {
                BoundaryKind::Absorbing
            } else {
                BoundaryKind::Reflecting
            }
        })
        .collect();
    BoundaryReport {
        at_zero,
        at_one: vec![one; n],
    }
}
