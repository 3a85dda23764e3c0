//! Switching diffusion models: the coefficient triple `(A, B, Q)` on an
//! interval with `N` phases, an optional symmetrizing weight, and validators
//! for the structural assumptions.

mod descriptor;
mod ornstein_uhlenbeck;
mod validate;
mod wright_fisher;

use std::fmt;
use std::sync::Arc;

pub use descriptor::ModelDescriptor;
pub use ornstein_uhlenbeck::switching_ornstein_uhlenbeck;
pub use validate::{validate_model, CheckResult, ValidationReport};
pub use wright_fisher::{
    classify_boundaries, wright_fisher_model, BoundaryKind, BoundaryReport, WrightFisherParams,
    Q_CLAMP_EPS,
};

use crate::error::{invalid, Result};
use crate::matrix::PhaseMatrix;
use crate::quadrature::MatrixWeight;

pub type CoefficientFn = Arc<dyn Fn(f64) -> PhaseMatrix + Send + Sync>;
pub type DerivativeFn = Arc<dyn Fn(f64) -> CoefficientDerivatives + Send + Sync>;

/// Step for centered differences when a model has no analytic derivatives.
pub const FD_STEP: f64 = 1e-6;

/// `A'(x)`, `A''(x)` and `B'(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientDerivatives {
    pub diffusion_d1: PhaseMatrix,
    pub diffusion_d2: PhaseMatrix,
    pub drift_d1: PhaseMatrix,
}

/// A bivariate process with a scalar diffusion component on `(a, b)` and a
/// phase in `1..=N`, generated by `1/2 A f'' + B f' + Q f`.
#[derive(Clone)]
pub struct SwitchingDiffusionModel {
    name: String,
    n_phases: usize,
    interval: (f64, f64),
    diffusion: CoefficientFn,
    drift: CoefficientFn,
    intensity: CoefficientFn,
    weight: Option<MatrixWeight>,
    derivatives: Option<DerivativeFn>,
    wright_fisher: Option<WrightFisherParams>,
}

impl fmt::Debug for SwitchingDiffusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SwitchingDiffusionModel")
            .field("name", &self.name)
            .field("n_phases", &self.n_phases)
            .field("interval", &self.interval)
            .field("has_weight", &self.weight.is_some())
            .field("wright_fisher", &self.wright_fisher)
            .finish()
    }
}

impl SwitchingDiffusionModel {
    pub fn builder(n_phases: usize, interval: (f64, f64)) -> ModelBuilder {
        ModelBuilder {
            name: "custom".into(),
            n_phases,
            interval,
            diffusion: None,
            drift: None,
            intensity: None,
            weight: None,
            derivatives: None,
            wright_fisher: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_phases(&self) -> usize {
        self.n_phases
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.interval.0 && x < self.interval.1
    }

    /// `A(x)`: diagonal diffusion matrix.
    pub fn diffusion(&self, x: f64) -> PhaseMatrix {
        (self.diffusion)(x)
    }

    /// `B(x)`: diagonal drift matrix.
    pub fn drift(&self, x: f64) -> PhaseMatrix {
        (self.drift)(x)
    }

    /// `Q(x)`: phase-transition intensity matrix.
    pub fn intensity(&self, x: f64) -> PhaseMatrix {
        (self.intensity)(x)
    }

    pub fn weight(&self) -> Option<&MatrixWeight> {
        self.weight.as_ref()
    }

    pub fn wright_fisher_params(&self) -> Option<&WrightFisherParams> {
        self.wright_fisher.as_ref()
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.derivatives.is_some()
    }

    /// Closed-form eigenvalue matrix `Gamma_n`, when the model family has one.
    pub fn eigenvalue_ladder(&self, n: usize) -> Option<PhaseMatrix> {
        self.wright_fisher.map(|p| p.eigenvalue_matrix(n))
    }

    /// `A'`, `A''`, `B'` at `x`: analytic when supplied, otherwise centered
    /// differences with step [`FD_STEP`].
    pub fn coefficient_derivatives(&self, x: f64) -> CoefficientDerivatives {
        if let Some(d) = &self.derivatives {
            return d(x);
        }
        let h = FD_STEP;
        let (ap, a0, am) = (self.diffusion(x + h), self.diffusion(x), self.diffusion(x - h));
        let (bp, bm) = (self.drift(x + h), self.drift(x - h));
        CoefficientDerivatives {
            diffusion_d1: (&ap - &am).scale(0.5 / h),
            diffusion_d2: (&(&ap - &a0.scale(2.0)) + &am).scale(1.0 / (h * h)),
            drift_d1: (&bp - &bm).scale(0.5 / h),
        }
    }

    /// Builds a copy with a different intensity matrix. The copy is no longer
    /// tagged as a Wright-Fisher model.
    pub fn with_intensity(&self, intensity: impl Fn(f64) -> PhaseMatrix + Send + Sync + 'static) -> Self {
        let mut m = self.clone();
        m.intensity = Arc::new(intensity);
        m.wright_fisher = None;
        m.name = format!("{} (modified)", self.name);
        m
    }
}

/// Builder for custom models.
pub struct ModelBuilder {
    name: String,
    n_phases: usize,
    interval: (f64, f64),
    diffusion: Option<CoefficientFn>,
    drift: Option<CoefficientFn>,
    intensity: Option<CoefficientFn>,
    weight: Option<MatrixWeight>,
    derivatives: Option<DerivativeFn>,
    wright_fisher: Option<WrightFisherParams>,
}

impl ModelBuilder {
    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn diffusion(mut self, f: impl Fn(f64) -> PhaseMatrix + Send + Sync + 'static) -> Self {
        self.diffusion = Some(Arc::new(f));
        self
    }

    pub fn drift(mut self, f: impl Fn(f64) -> PhaseMatrix + Send + Sync + 'static) -> Self {
        self.drift = Some(Arc::new(f));
        self
    }

    pub fn intensity(mut self, f: impl Fn(f64) -> PhaseMatrix + Send + Sync + 'static) -> Self {
        self.intensity = Some(Arc::new(f));
        self
    }

    pub fn weight(mut self, w: MatrixWeight) -> Self {
        self.weight = Some(w);
        self
    }

    pub fn derivatives(mut self, f: impl Fn(f64) -> CoefficientDerivatives + Send + Sync + 'static) -> Self {
        self.derivatives = Some(Arc::new(f));
        self
    }

    pub(crate) fn wright_fisher(mut self, p: WrightFisherParams) -> Self {
        self.wright_fisher = Some(p);
        self
    }

    pub fn build(self) -> Result<SwitchingDiffusionModel> {
        if self.n_phases == 0 {
            return Err(invalid("n_phases", "need at least one phase"));
        }
        let (a, b) = self.interval;
        if !(a < b) || a.is_nan() || b.is_nan() {
            return Err(invalid("interval", format!("need a < b, got ({a}, {b})")));
        }
        if let Some(w) = &self.weight {
            if w.dim() != self.n_phases {
                return Err(crate::error::Error::DimensionMismatch {
                    expected: self.n_phases,
                    found: w.dim(),
                });
            }
        }
        let n = self.n_phases;
        Ok(SwitchingDiffusionModel {
            name: self.name,
            n_phases: n,
            interval: self.interval,
            diffusion: self.diffusion.ok_or_else(|| invalid("diffusion", "coefficient A(x) missing"))?,
            drift: self.drift.ok_or_else(|| invalid("drift", "coefficient B(x) missing"))?,
            intensity: self
                .intensity
                .unwrap_or_else(|| Arc::new(move |_| PhaseMatrix::zeros(n))),
            weight: self.weight,
            derivatives: self.derivatives,
            wright_fisher: self.wright_fisher,
        })
    }
}

/// Jump distribution `-Q_ij / Q_ii` over `j != i` out of phase `i`
/// (0-based). `None` when `Q_ii = 0` (the phase is never left).
pub fn jump_distribution(q: &PhaseMatrix, i: usize) -> Option<Vec<f64>> {
    let qii = q[(i, i)];
    if qii >= 0.0 {
        return None;
    }
    Some(
        (0..q.dim())
            .map(|j| if j == i { 0.0 } else { -q[(i, j)] / qii })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn builder_requires_coefficients() {
        let r = SwitchingDiffusionModel::builder(2, (0.0, 1.0)).build();
        assert!(r.is_err());
        let r = SwitchingDiffusionModel::builder(0, (0.0, 1.0))
            .diffusion(|_| PhaseMatrix::identity(1))
            .drift(|_| PhaseMatrix::zeros(1))
            .build();
        assert!(r.is_err());
    }

    #[test]
    fn finite_difference_fallback_on_quadratic_coefficients() {
        let m = SwitchingDiffusionModel::builder(1, (0.0, 1.0))
            .diffusion(|x| PhaseMatrix::from_diagonal(&[2.0 * x * (1.0 - x)]))
            .drift(|x| PhaseMatrix::from_diagonal(&[1.0 - 3.0 * x]))
            .build()
            .unwrap();
        let d = m.coefficient_derivatives(0.3);
        assert!((d.diffusion_d1[(0, 0)] - (2.0 - 4.0 * 0.3)).abs() < 1e-8);
        assert!((d.diffusion_d2[(0, 0)] + 4.0).abs() < 1e-3);
        assert!((d.drift_d1[(0, 0)] + 3.0).abs() < 1e-8);
    }

    #[test]
    fn absorbing_phase_has_no_jump_distribution() {
        let q = PhaseMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, -1.0]]);
        assert!(jump_distribution(&q, 0).is_none());
        assert_eq!(jump_distribution(&q, 1).unwrap(), vec![1.0, 0.0]);
    }

    proptest! {
        #[test]
        fn jump_rows_sum_to_one(
            alpha in -0.9f64..3.0, beta in -0.9f64..3.0, frac in 0.01f64..0.99,
            n in 2usize..7, x in 0.001f64..0.999,
        ) {
            let p = WrightFisherParams::new(alpha, beta, frac * (beta + 1.0), n).unwrap();
            let q = p.intensity(x);
            for i in 0..n {
                if let Some(row) = jump_distribution(&q, i) {
                    let s: f64 = row.iter().sum();
                    prop_assert!((s - 1.0).abs() < 1e-12);
                    prop_assert!(row.iter().all(|&v| v >= 0.0));
                }
            }
        }
    }
}
