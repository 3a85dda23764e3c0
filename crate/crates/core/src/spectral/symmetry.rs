use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::PhaseMatrix;
use crate::model::SwitchingDiffusionModel;

/// Worst residual of each symmetry equation over the sample points.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    /// `A^T W - W A`
    pub diffusion: f64,
    /// `B^T W - (W A)' + W B`
    pub drift: f64,
    /// `Q^T W - 1/2 (W A)'' + (W B)' - W Q`
    pub intensity: f64,
    pub worst_x: [f64; 3],
}

impl SymmetryReport {
    pub fn max_residual(&self) -> f64 {
        self.diffusion.max(self.drift).max(self.intensity)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Evaluates the three equations that make the generator symmetric with
/// respect to the model's weight.
pub fn verify_symmetry_equations(model: &SwitchingDiffusionModel, points: &[f64]) -> Result<SymmetryReport> {
    let w = model.weight().ok_or(Error::MissingWeight)?;
    if points.is_empty() {
        return Err(Error::Empty("sample points"));
    }
    let mut report = SymmetryReport {
        diffusion: 0.0,
        drift: 0.0,
        intensity: 0.0,
        worst_x: [f64::NAN; 3],
    };
    for &x in points {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::OutOfDomain { x, lo: 0.0, hi: 1.0 });
        }
        let [w0, w1, w2] = w.eval_with_derivatives(x);
        let (a, b, q) = (model.diffusion(x), model.drift(x), model.intensity(x));
        let d = model.coefficient_derivatives(x);
        let wa1 = &(&w1 * &a) + &(&w0 * &d.diffusion_d1);
        let wa2 = &(&(&w2 * &a) + &(&w1 * &d.diffusion_d1).scale(2.0)) + &(&w0 * &d.diffusion_d2);
        let wb1 = &(&w1 * &b) + &(&w0 * &d.drift_d1);
        let r = [
            resid(&(&a.transpose() * &w0) - &(&w0 * &a)),
            resid(&(&(&b.transpose() * &w0) - &wa1) + &(&w0 * &b)),
            resid(&(&(&(&q.transpose() * &w0) - &wa2.scale(0.5)) + &wb1) - &(&w0 * &q)),
        ];
        for (slot, (&v, wx)) in [&mut report.diffusion, &mut report.drift, &mut report.intensity]
            .into_iter()
            .zip(r.iter().zip(report.worst_x.iter_mut()))
        {
            if v > *slot || wx.is_nan() {
                *slot = slot.max(v);
                *wx = x;
            }
        }
    }
    Ok(report)
}

fn resid(m: PhaseMatrix) -> f64 {
    m.max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{wright_fisher_model, WrightFisherParams};

    fn grid() -> Vec<f64> {
        (1..30).map(|i| i as f64 / 30.0).collect()
    }

    #[test]
    fn wright_fisher_weight_symmetrizes() {
        for &(a, b, k, n) in &[(0.0, 0.0, 0.5, 4), (1.5, 0.5, 1.1, 3), (-0.4, 2.0, 2.5, 5)] {
            let m = wright_fisher_model(WrightFisherParams::new(a, b, k, n).unwrap()).unwrap();
            let r = verify_symmetry_equations(&m, &grid()).unwrap();
            assert!(r.passed(1e-8), "{r:?}");
        }
    }

    #[test]
    fn perturbed_intensity_breaks_third_equation() {
        let p = WrightFisherParams::new(0.0, 0.0, 0.5, 3).unwrap();
        let m = wright_fisher_model(p).unwrap().with_intensity(move |x| {
            let mut q = p.intensity(x);
            q[(0, 1)] += 0.1;
            q[(0, 0)] -= 0.1;
            q
        });
        let r = verify_symmetry_equations(&m, &grid()).unwrap();
        assert!(r.diffusion < 1e-12 && r.drift < 1e-8);
        assert!(r.intensity > 1e-3);
    }

    #[test]
    fn weightless_model_rejected() {
        let m = crate::model::switching_ornstein_uhlenbeck();
        assert!(matches!(verify_symmetry_equations(&m, &[0.5]), Err(Error::MissingWeight)));
    }
}
