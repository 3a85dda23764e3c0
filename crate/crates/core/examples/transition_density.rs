//! Matrix transition density on a grid, relaxing to the invariant density.

use switchdiff::spectral::{InvariantDistribution, SpectralBasis};
use switchdiff::WrightFisherParams;

fn main() -> switchdiff::Result<()> {
    let p = WrightFisherParams::new(1.0, 1.0, 1.25, 2)?;
    let basis = SpectralBasis::wright_fisher(&p, 12)?;
    let inv = InvariantDistribution::new(&p)?;
    for t in [0.05, 0.5, 5.0] {
        println!("t = {t}");
        for y in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let k = basis.transition_density(t, 0.2, y)?;
            println!(
                "  y = {y:.1}  P11 {:>9.5}  P12 {:>9.5}  P21 {:>9.5}  P22 {:>9.5}",
                k[(0, 0)],
                k[(0, 1)],
                k[(1, 0)],
                k[(1, 1)]
            );
        }
    }
    let psi = inv.density(0.5)?;
    println!("invariant density at y = 0.5: {psi:.5?}");
    println!("backward residual at (0.3, 0.2, 0.6): {:.1e}", basis.backward_residual(0.3, 0.2, 0.6)?);
    Ok(())
}
