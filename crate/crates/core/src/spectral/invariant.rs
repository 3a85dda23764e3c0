use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::WrightFisherParams;
use crate::quadrature::{default_node_count, MatrixWeight, QuadratureRule};
use crate::special::{generalized_binomial, pochhammer, real_binomial};

/// Invariant density `psi(y) = c e^T W(y)` of the Wright-Fisher family.
#[derive(Debug, Clone)]
pub struct InvariantDistribution {
    params: WrightFisherParams,
    weight: MatrixWeight,
    rule: QuadratureRule,
    normalization: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantSummary {
    pub normalization: f64,
    pub phase_masses: Vec<f64>,
    pub total_mass: f64,
    /// Set when `alpha < 0` or `beta < 0`: the density is integrable but
    /// unbounded at an endpoint.
    pub boundary_atoms: bool,
}

impl InvariantDistribution {
    pub fn new(params: &WrightFisherParams) -> Result<Self> {
        params.validate()?;
        let weight = params.weight();
        let rule = weight.rule(default_node_count(weight.factor_degree(), params.n_phases))?;
        let mass: f64 = rule
            .pairs()
            .map(|(y, w)| w * weight.factor().eval(y).trace())
            .sum();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Numeric(format!("weight mass {mass} is not positive")));
        }
        Ok(Self {
            params: *params,
            weight,
            rule,
            normalization: mass.recip(),
        })
    }

    /// `c = (int e^T W e)^{-1}`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `c e^T W(y)`, phase components.
    pub fn density(&self, y: f64) -> Result<Vec<f64>> {
        check(y)?;
        let w = self.weight.eval(y);
        let n = self.params.n_phases;
        Ok((0..n).map(|j| self.normalization * (0..n).map(|i| w[(i, j)]).sum::<f64>()).collect())
    }

    /// The same density from its product formula.
    /// Defined on the closed interval; components are infinite at an
    /// endpoint whose exponent is negative.
    pub fn closed_form(&self, y: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::OutOfDomain { x: y, lo: 0.0, hi: 1.0 });
        }
        let WrightFisherParams { alpha, beta, k, n_phases: n } = self.params;
        let nf = n as f64;
        let head = real_binomial(alpha, beta + nf) * (beta + nf) / pochhammer(alpha + beta - k + 2.0, (n - 1) as u32);
        Ok((1..=n)
            .map(|j| {
                let jf = j as f64;
                head * y.powf(alpha + nf - jf)
                    * (1.0 - y).powf(beta)
                    * generalized_binomial(nf - 1.0, (j - 1) as u32)
                    * pochhammer(k, (n - j) as u32)
                    * pochhammer(beta - k + 1.0, (j - 1) as u32)
            })
            .collect())
    }

    /// `int_0^1 psi_j`, by the rule that absorbs the Jacobi factor.
    pub fn phase_masses(&self) -> Vec<f64> {
        let n = self.params.n_phases;
        let mut m = vec![0.0; n];
        for (y, w) in self.rule.pairs() {
            let f = self.weight.factor().eval(y);
            for (j, mj) in m.iter_mut().enumerate() {
                *mj += self.normalization * w * f[(j, j)];
            }
        }
        m
    }

    /// `mass[j][b] = int psi_j` over the `b`-th of `bins` equal cells of `(0, 1)`.
    pub fn bin_masses(&self, bins: usize) -> Result<Vec<Vec<f64>>> {
        if bins == 0 {
            return Err(Error::Empty("bins"));
        }
        let WrightFisherParams { alpha, beta, n_phases: n, .. } = self.params;
        let nodes = default_node_count(self.weight.factor_degree(), n) + 32;
        let mut mass = vec![vec![0.0; bins]; n];
        for b in 0..bins {
            let (lo, hi) = (b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
            let ra = if b == 0 { alpha } else { 0.0 };
            let rb = if b + 1 == bins { beta } else { 0.0 };
            let rule = crate::quadrature::gauss_jacobi_rule(ra, rb, nodes)?.mapped(lo, hi)?;
            for (y, w) in rule.pairs() {
                let rest = y.powf(alpha - ra) * (1.0 - y).powf(beta - rb);
                let f = self.weight.factor().eval(y);
                for (j, row) in mass.iter_mut().enumerate() {
                    row[b] += self.normalization * w * rest * f[(j, j)];
                }
            }
        }
        Ok(mass)
    }

    pub fn boundary_atoms(&self) -> bool {
        self.params.alpha < 0.0 || self.params.beta < 0.0
    }

    /// Largest `|closed form - c e^T W|` over the points, relative to
    /// `max(1, |psi_j|)`.
    pub fn route_discrepancy(&self, points: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &y in points {
            for (a, b) in self.closed_form(y)?.into_iter().zip(self.density(y)?) {
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
        }
        Ok(worst)
    }

    /// `max_j |(1/2 (psi A)'' - (psi B)' + psi Q)_j|` at `y`.
    pub fn stationarity_residual(&self, y: f64) -> Result<f64> {
        check(y)?;
        let p = &self.params;
        let [w0, w1, w2] = self.weight.eval_with_derivatives(y);
        let (a, b, q) = (p.diffusion(y), p.drift(y), p.intensity(y));
        let d = p.derivatives(y);
        let wa2 = &(&(&w2 * &a) + &(&w1 * &d.diffusion_d1).scale(2.0)) + &(&w0 * &d.diffusion_d2);
        let wb1 = &(&w1 * &b) + &(&w0 * &d.drift_d1);
        let r = &(&wa2.scale(0.5) - &wb1) + &(&w0 * &q);
        let n = p.n_phases;
        Ok((0..n)
            .map(|j| (self.normalization * (0..n).map(|i| r[(i, j)]).sum::<f64>()).abs())
            .fold(0.0, f64::max))
    }

    pub fn summary(&self) -> InvariantSummary {
        let phase_masses = self.phase_masses();
        InvariantSummary {
            normalization: self.normalization,
            total_mass: phase_masses.iter().sum(),
            phase_masses,
            boundary_atoms: self.boundary_atoms(),
        }
    }
}

fn check(y: f64) -> Result<()> {
    if y > 0.0 && y < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain { x: y, lo: 0.0, hi: 1.0 })
    }
}
