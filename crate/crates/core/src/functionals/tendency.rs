use serde::Serialize;

use crate::model::WrightFisherParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    MaxForward,
    MaxBackward,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tendency {
    Forward,
    Backward,
    Balanced,
}

/// Point where `lambda_i(x) = mu_i(x)`; phase `i` is 1-based.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseThreshold {
    pub phase: usize,
    /// `None` for the first and last phase.
    pub x0: Option<f64>,
    /// `x0 >= 1`: the forward rate dominates on all of `(0, 1)`.
    pub always_forward: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TendencyReport {
    pub thresholds: Vec<PhaseThreshold>,
    pub regime: Regime,
    /// `(beta + 1) m / (N - 1)`, `m = 1..N-2`.
    pub k_breakpoints: Vec<f64>,
}

impl TendencyReport {
    pub fn threshold(&self, phase: usize) -> Option<f64> {
        self.thresholds.get(phase.checked_sub(1)?)?.x0
    }
}

/// Phase thresholds `x0(i) = (N-i)(i+beta-k) / ((i-1)(N-i+k))` and the
/// overall regime.
pub fn tendency_analysis(p: &WrightFisherParams) -> TendencyReport {
    let n = p.n_phases;
    let thresholds = (1..=n)
        .map(|i| {
            let x0 = (i > 1 && i < n).then(|| p.forward_numerator(i) / p.backward_numerator(i));
            PhaseThreshold {
                phase: i,
                x0,
                always_forward: x0.is_some_and(|x| x >= 1.0),
            }
        })
        .collect();
    let nf = n as f64;
    let b1 = p.beta + 1.0;
    let regime = if n < 2 || p.k < b1 / (nf - 1.0) {
        Regime::MaxForward
    } else if p.k > b1 * (nf - 2.0) / (nf - 1.0) {
        Regime::MaxBackward
    } else {
        Regime::Mixed
    };
    let k_breakpoints = (1..n.saturating_sub(1)).map(|m| b1 * m as f64 / (nf - 1.0)).collect();
    TendencyReport {
        thresholds,
        regime,
        k_breakpoints,
    }
}

impl WrightFisherParams {
    /// Compares the forward rate `lambda_i(x)` with the backward rate `mu_i(x)`.
    pub fn tendency(&self, i: usize, x: f64) -> Tendency {
        let (l, m) = (self.lambda(i, x), self.mu(i, x));
        if l > m {
            Tendency::Forward
        } else if l < m {
            Tendency::Backward
        } else {
            Tendency::Balanced
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(k: f64) -> TendencyReport {
        tendency_analysis(&WrightFisherParams::new(0.0, 1.0, k, 5).unwrap())
    }

    #[test]
    fn tabulated_thresholds() {
        let r = report(1.25);
        assert!((r.threshold(3).unwrap() - 0.846).abs() < 1e-3);
        assert!((r.threshold(4).unwrap() - 0.556).abs() < 1e-3);
        let r = report(1.75);
        assert!((r.threshold(2).unwrap() - 0.789).abs() < 1e-3);
        assert!((r.threshold(3).unwrap() - 0.600).abs() < 1e-12);
        assert!((r.threshold(4).unwrap() - 0.394).abs() < 1e-3);
        assert_eq!(r.regime, Regime::MaxBackward);
    }

    #[test]
    fn small_k_is_always_forward() {
        let r = report(0.25);
        assert_eq!(r.regime, Regime::MaxForward);
        assert!(r.thresholds.iter().filter_map(|t| t.x0).all(|x| x > 1.0));
        assert!(r.thresholds[1..4].iter().all(|t| t.always_forward));
        assert_eq!(r.k_breakpoints, vec![0.5, 1.0, 1.5]);
    }

    #[test]
    fn end_phases_have_no_threshold() {
        let r = report(1.0);
        assert!(r.threshold(1).is_none() && r.threshold(5).is_none());
        assert_eq!(r.regime, Regime::Mixed);
    }

    proptest! {
        #[test]
        fn rates_balance_at_threshold(b in -0.9..3.0f64, kf in 0.01..0.99f64, n in 3usize..8) {
            let p = WrightFisherParams::new(0.0, b, kf * (b + 1.0), n).unwrap();
            for t in tendency_analysis(&p).thresholds {
                if let Some(x0) = t.x0 {
                    prop_assert!(x0 > 0.0);
                    if x0 < 1.0 {
                        let (l, m) = (p.lambda(t.phase, x0), p.mu(t.phase, x0));
                        prop_assert!((l - m).abs() <= 1e-12 * l.abs().max(1.0));
                        prop_assert_eq!(p.tendency(t.phase, 0.5 * x0), Tendency::Forward);
                    }
                }
            }
        }
    }
}
