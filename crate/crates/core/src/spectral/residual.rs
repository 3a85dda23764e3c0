//! Diagnostic residuals of the truncated expansion.

use super::SpectralBasis;
use crate::error::Result;
use crate::matrix::PhaseMatrix;
use crate::poly::MatrixPolynomial;
use crate::quadrature::weighted_inner_product;

impl SpectralBasis {
    fn derivative_sums(&self, t: f64, x: f64, y: f64) -> [PhaseMatrix; 4] {
        // K = sum Phi(x) E Phi(y)^T and its t-, x- and xx-derivatives
        let n = self.n_phases();
        let mut out = [
            PhaseMatrix::zeros(n),
            PhaseMatrix::zeros(n),
            PhaseMatrix::zeros(n),
            PhaseMatrix::zeros(n),
        ];
        for m in 0..self.truncation() {
            let e = self.propagator(m, t);
            let right = &e * &self.eigenfunction(m).eval(y).transpose();
            let p0 = self.eigenfunction(m).eval(x);
            out[0] = &out[0] + &(&p0 * &right);
            out[1] = &out[1] + &(&(&p0 * self.eigenvalue(m)) * &right);
            out[2] = &out[2] + &(&self.first_derivatives()[m].eval(x) * &right);
            out[3] = &out[3] + &(&self.second_derivatives()[m].eval(x) * &right);
        }
        out
    }

    /// `max |d/dt P - (1/2 A P'' + B P' + Q P)|` with derivatives in `x`.
    pub fn backward_residual(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        self.transition_density(t, x, y)?;
        let p = self.params();
        let w = self.weight().eval(y);
        let [k0, kt, kx, kxx] = self.derivative_sums(t, x, y);
        let gen = &(&(&p.diffusion(x).scale(0.5) * &kxx) + &(&p.drift(x) * &kx)) + &(&p.intensity(x) * &k0);
        Ok((&kt * &w).max_abs_diff(&(&gen * &w)))
    }

    /// `max |d/dt P - (1/2 (P A)'' - (P B)' + P Q)|` with derivatives in `y`.
    pub fn forward_residual(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        self.transition_density(t, x, y)?;
        let p = self.params();
        let n = self.n_phases();
        let [w0, w1, w2] = self.weight().eval_with_derivatives(y);
        let (a, b, q) = (p.diffusion(y), p.drift(y), p.intensity(y));
        let d = p.derivatives(y);
        let (a1, a2, b1) = (d.diffusion_d1, d.diffusion_d2, d.drift_d1);
        let mut lhs = PhaseMatrix::zeros(n);
        let mut rhs = PhaseMatrix::zeros(n);
        for m in 0..self.truncation() {
            let left = &self.eigenfunction(m).eval(x) * &self.propagator(m, t);
            let f0 = self.eigenfunction(m).eval(y).transpose();
            let f1 = self.first_derivatives()[m].eval(y).transpose();
            let f2 = self.second_derivatives()[m].eval(y).transpose();
            // R = Phi^T W and its y-derivatives
            let r0 = &f0 * &w0;
            let r1 = &(&f1 * &w0) + &(&f0 * &w1);
            let r2 = &(&(&f2 * &w0) + &(&f1 * &w1).scale(2.0)) + &(&f0 * &w2);
            let ra2 = &(&(&r2 * &a) + &(&r1 * &a1).scale(2.0)) + &(&r0 * &a2);
            let rb1 = &(&r1 * &b) + &(&r0 * &b1);
            let g = &(&ra2.scale(0.5) - &rb1) + &(&r0 * &q);
            lhs = &lhs + &(&(&left * self.eigenvalue(m)) * &r0);
            rhs = &rhs + &(&left * &g);
        }
        Ok(lhs.max_abs_diff(&rhs))
    }

    /// `(1/2 A Phi'' + B Phi' + Q Phi - Phi Gamma)(x)` for one eigenfunction.
    pub fn eigen_residual_at(&self, n: usize, x: f64) -> PhaseMatrix {
        let p = self.params();
        let f = self.eigenfunction(n);
        let lhs = &(&(&p.diffusion(x).scale(0.5) * &self.second_derivatives()[n].eval(x))
            + &(&p.drift(x) * &self.first_derivatives()[n].eval(x)))
            + &(&p.intensity(x) * &f.eval(x));
        &lhs - &(&f.eval(x) * self.eigenvalue(n))
    }

    /// For each `n`, the largest coefficient of `(1-x)(A Phi_n - Phi_n Gamma_n)`
    /// in the shifted Chebyshev basis. The product is a polynomial, so
    /// interpolation at enough Lobatto points recovers it exactly.
    pub fn operator_residuals(&self) -> Vec<f64> {
        (0..self.truncation())
            .map(|n| {
                let deg = self.eigenfunction(n).degree() + 1;
                let k = deg.max(1);
                let values: Vec<PhaseMatrix> = (0..=k)
                    .map(|r| {
                        let u = (std::f64::consts::PI * r as f64 / k as f64).cos();
                        let x = 0.5 * (u + 1.0);
                        self.cleared_residual(n, x)
                    })
                    .collect();
                let coeffs = lobatto_to_chebyshev(&values);
                coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
            })
            .collect()
    }

    fn cleared_residual(&self, n: usize, x: f64) -> PhaseMatrix {
        let p = self.params();
        let (q0, q1) = p.cleared_intensity();
        let f = self.eigenfunction(n);
        let f0 = f.eval(x);
        let inner = &(&(&p.diffusion(x).scale(0.5) * &self.second_derivatives()[n].eval(x))
            + &(&p.drift(x) * &self.first_derivatives()[n].eval(x)))
            - &(&f0 * self.eigenvalue(n));
        &inner.scale(1.0 - x) + &(&(&q0 + &q1.scale(x)) * &f0)
    }

    /// `max_{n,m} |<A Phi_n, Phi_m>_W - <Phi_n, A Phi_m>_W|`.
    pub fn self_adjointness_defect(&self) -> Result<f64> {
        let apply = |n: usize| {
            let p = *self.params();
            let f: MatrixPolynomial = self.eigenfunction(n).clone();
            let f1 = self.first_derivatives()[n].clone();
            let f2 = self.second_derivatives()[n].clone();
            move |x: f64| {
                &(&(&p.diffusion(x).scale(0.5) * &f2.eval(x)) + &(&p.drift(x) * &f1.eval(x)))
                    + &(&p.intensity(x) * &f.eval(x))
            }
        };
        let mut worst: f64 = 0.0;
        let dim = self.n_phases();
        for n in 0..self.truncation() {
            for m in 0..=n {
                let (fn_, fm) = (self.eigenfunction(n), self.eigenfunction(m));
                let lhs = weighted_inner_product(self.weight(), self.rule(), apply(n), |x| fm.eval(x), dim)?;
                let rhs = weighted_inner_product(self.weight(), self.rule(), |x| fn_.eval(x), apply(m), dim)?;
                worst = worst.max(lhs.max_abs_diff(&rhs));
            }
        }
        Ok(worst)
    }

    /// `max |int P(s; x, z) P(t; z, y) dz - P(s + t; x, y)|`.
    pub fn chapman_kolmogorov_defect(&self, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
        let direct = self.transition_density(s + t, x, y)?;
        self.transition_density(s, x, y)?;
        let n = self.n_phases();
        let mut acc = PhaseMatrix::zeros(n);
        for (z, w) in self.rule().pairs() {
            let left = &self.kernel(s, x, z) * &self.weight().factor().eval(z);
            let right = self.transition_density(t, z, y)?;
            acc = &acc + &(&left * &right).scale(w);
        }
        Ok(acc.max_abs_diff(&direct))
    }
}

/// Chebyshev coefficients from values at `u_r = cos(pi r / K)`, `r = 0..=K`.
fn lobatto_to_chebyshev(values: &[PhaseMatrix]) -> Vec<PhaseMatrix> {
    let k = values.len() - 1;
    let n = values[0].dim();
    if k == 0 {
        return vec![values[0].clone()];
    }
    (0..=k)
        .map(|j| {
            let mut c = PhaseMatrix::zeros(n);
            for (r, v) in values.iter().enumerate() {
                let half = if r == 0 || r == k { 0.5 } else { 1.0 };
                let tj = (std::f64::consts::PI * (j * r) as f64 / k as f64).cos();
                c = &c + &v.scale(half * tj);
            }
            let half = if j == 0 || j == k { 0.5 } else { 1.0 };
            c.scale(2.0 * half / k as f64)
        })
        .collect()
}
