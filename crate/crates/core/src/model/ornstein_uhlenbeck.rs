use super::SwitchingDiffusionModel;
use crate::matrix::PhaseMatrix;

/// Three Ornstein-Uhlenbeck phases on the real line with `sigma_i^2 = i^2`,
/// `tau_i(x) = -i x` and a position-dependent full intensity matrix.
///
/// Only used to illustrate path simulation; no spectral data is known.
pub fn switching_ornstein_uhlenbeck() -> SwitchingDiffusionModel {
    SwitchingDiffusionModel::builder(3, (f64::NEG_INFINITY, f64::INFINITY))
        .name("switching_ornstein_uhlenbeck")
        .diffusion(|_| PhaseMatrix::from_diagonal(&[1.0, 4.0, 9.0]))
        .drift(|x| PhaseMatrix::from_diagonal(&[-x, -2.0 * x, -3.0 * x]))
        .intensity(|x| {
            let x2 = x * x;
            let r = 1.0 + x2;
            let g = (-x2).exp();
            PhaseMatrix::from_rows(&[
                vec![-(2.0 + x2) / r, (5.0 + 3.0 * x2) / (6.0 * r), (7.0 + 3.0 * x2) / (6.0 * r)],
                vec![1.0 + x2 / 400.0, -2.0 - x2 / 100.0, 1.0 + 3.0 * x2 / 400.0],
                vec![0.5 + 0.5 * g, 0.5 + 0.5 * g, -1.0 - g],
            ])
        })
        .build()
        .expect("complete model")
}
