use serde::Serialize;

use super::SwitchingDiffusionModel;
use crate::error::{Error, Result};

/// Outcome of one structural check over all sample points.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst violation measure seen (0 when nothing was violated).
    pub worst_value: f64,
    /// Sample point where `worst_value` occurred.
    pub worst_x: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub max_row_sum: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

struct Tracker {
    name: &'static str,
    worst: f64,
    worst_x: Option<f64>,
    failed: bool,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            worst: 0.0,
            worst_x: None,
            failed: false,
        }
    }

    fn observe(&mut self, x: f64, value: f64, ok: bool) {
        if value > self.worst || (!ok && !self.failed) {
            self.worst = value.max(self.worst);
            self.worst_x = Some(x);
        }
        self.failed |= !ok;
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            passed: !self.failed,
            worst_value: self.worst,
            worst_x: self.worst_x,
        }
    }
}

const TOL: f64 = 1e-12;

/// Checks the structural assumptions at each sample point: `A`, `B`
/// diagonal, `A >= 0`, `Q` a conservative intensity matrix, and `W`
/// symmetric positive definite when present.
pub fn validate_model(m: &SwitchingDiffusionModel, sample_points: &[f64]) -> Result<ValidationReport> {
    if sample_points.is_empty() {
        return Err(Error::Empty("sample points"));
    }
    let (lo, hi) = m.interval();
    if let Some(&x) = sample_points.iter().find(|&&x| !m.contains(x)) {
        return Err(Error::OutOfDomain { x, lo, hi });
    }
    let mut a_diag = Tracker::new("diffusion_diagonal");
    let mut b_diag = Tracker::new("drift_diagonal");
    let mut a_nonneg = Tracker::new("diffusion_nonnegative");
    let mut q_off = Tracker::new("intensity_off_diagonal_nonnegative");
    let mut q_diag = Tracker::new("intensity_diagonal_nonpositive");
    let mut q_rows = Tracker::new("intensity_row_sums");
    let mut w_spd = m.weight().map(|_| Tracker::new("weight_symmetric_positive_definite"));
    let n = m.n_phases();

    for &x in sample_points {
        let a = m.diffusion(x);
        let b = m.drift(x);
        let q = m.intensity(x);
        let scale_a = a.max_abs().max(1.0);
        let off_a = a.off_diagonal_norm();
        a_diag.observe(x, off_a, off_a <= TOL * scale_a);
        let off_b = b.off_diagonal_norm();
        b_diag.observe(x, off_b, off_b <= TOL * b.max_abs().max(1.0));
        let neg_a = a.diagonal_vec().iter().fold(0.0_f64, |m, &v| m.max(-v));
        a_nonneg.observe(x, neg_a, neg_a <= 0.0);

        let mut neg_off: f64 = 0.0;
        let mut pos_diag: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    pos_diag = pos_diag.max(q[(i, i)]);
                } else {
                    neg_off = neg_off.max(-q[(i, j)]);
                }
            }
        }
        q_off.observe(x, neg_off, neg_off <= 0.0);
        q_diag.observe(x, pos_diag, pos_diag <= 0.0);
        let row = q.row_sums().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        q_rows.observe(x, row, row <= TOL * q.max_abs().max(1.0));

        if let (Some(t), Some(w)) = (w_spd.as_mut(), m.weight()) {
            let wx = w.eval(x);
            let asym = wx.max_abs_diff(&wx.transpose());
            let sym_ok = asym <= TOL * wx.max_abs().max(f64::MIN_POSITIVE);
            let pd_ok = nalgebra::Cholesky::new(wx.clone().into_inner()).is_some();
            t.observe(x, asym, sym_ok && pd_ok);
        }
    }
    let max_row_sum = q_rows.worst;
    let mut checks = vec![
        a_diag.finish(),
        b_diag.finish(),
        a_nonneg.finish(),
        q_off.finish(),
        q_diag.finish(),
        q_rows.finish(),
    ];
    if let Some(t) = w_spd {
        checks.push(t.finish());
    }
    Ok(ValidationReport { checks, max_row_sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::PhaseMatrix;
    use crate::model::{wright_fisher_model, WrightFisherParams};

    fn interior(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
    }

    #[test]
    fn wright_fisher_passes_everything() {
        for &(a, b, k, n) in &[(0.0, 0.0, 0.5, 4), (-0.5, 1.0, 1.2, 3), (2.0, -0.3, 0.2, 5)] {
            let m = wright_fisher_model(WrightFisherParams::new(a, b, k, n).unwrap()).unwrap();
            let r = validate_model(&m, &interior(50)).unwrap();
            assert!(r.passed(), "{:?}", r.failures());
            assert!(r.max_row_sum < 1e-12);
        }
    }

    fn two_phase(a: impl Fn(f64) -> PhaseMatrix + Send + Sync + 'static, q: PhaseMatrix) -> SwitchingDiffusionModel {
        SwitchingDiffusionModel::builder(2, (0.0, 1.0))
            .diffusion(a)
            .drift(|_| PhaseMatrix::zeros(2))
            .intensity(move |_| q.clone())
            .build()
            .unwrap()
    }

    #[test]
    fn nonconservative_intensity_fails_row_sums() {
        let m = two_phase(
            |_| PhaseMatrix::identity(2),
            PhaseMatrix::from_rows(&[vec![-1.0, 2.0], vec![1.0, -1.0]]),
        );
        let r = validate_model(&m, &interior(5)).unwrap();
        assert!(!r.passed());
        assert_eq!(r.failures(), vec!["intensity_row_sums"]);
        assert!((r.max_row_sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn off_diagonal_diffusion_fails() {
        let m = two_phase(
            |_| PhaseMatrix::from_rows(&[vec![1.0, 0.1], vec![0.1, 1.0]]),
            PhaseMatrix::zeros(2),
        );
        let r = validate_model(&m, &interior(5)).unwrap();
        assert_eq!(r.failures(), vec!["diffusion_diagonal"]);
        let c = r.check("diffusion_diagonal").unwrap();
        assert!((c.worst_value - 0.1).abs() < 1e-15);
        assert!(c.worst_x.is_some());
    }

    #[test]
    fn empty_and_exterior_samples_rejected() {
        let m = wright_fisher_model(WrightFisherParams::new(0.0, 0.0, 0.5, 2).unwrap()).unwrap();
        assert!(matches!(validate_model(&m, &[]), Err(Error::Empty(_))));
        assert!(matches!(validate_model(&m, &[0.5, 1.0]), Err(Error::OutOfDomain { .. })));
    }
}
