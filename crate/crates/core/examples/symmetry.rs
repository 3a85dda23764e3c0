//! Symmetry equations and self-adjointness of the generator.

use switchdiff::spectral::{verify_symmetry_equations, SpectralBasis};
use switchdiff::{wright_fisher_model, WrightFisherParams};

fn main() -> switchdiff::Result<()> {
    let xs: Vec<f64> = (1..30).map(|i| i as f64 / 30.0).collect();
    for n in 2..=5 {
        let p = WrightFisherParams::new(0.5, 1.0, 0.8, n)?;
        let r = verify_symmetry_equations(&wright_fisher_model(p)?, &xs)?;
        let b = SpectralBasis::wright_fisher(&p, 8)?;
        println!(
            "N = {n}: diffusion {:.1e}, drift {:.1e}, intensity {:.1e}, self-adjointness {:.1e}",
            r.diffusion,
            r.drift,
            r.intensity,
            b.self_adjointness_defect()?
        );
    }
    Ok(())
}
