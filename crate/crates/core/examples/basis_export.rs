//! Round trip of a spectral basis through JSON.

use switchdiff::spectral::SpectralBasis;
use switchdiff::WrightFisherParams;

fn main() -> switchdiff::Result<()> {
    let b = SpectralBasis::wright_fisher(&WrightFisherParams::new(0.0, 1.0, 0.5, 3)?, 6)?;
    let json = b.to_json()?;
    let back = SpectralBasis::from_json(&json)?;
    let d = b.transition_density(0.4, 0.3, 0.6)?.max_abs_diff(&back.transition_density(0.4, 0.3, 0.6)?);
    println!("{} bytes, {} eigenfunctions, density difference after reload {d:.1e}", json.len(), back.truncation());
    for e in back.entries().iter().take(3) {
        println!("n = {}: Gamma diagonal {:?}", e.n, e.gamma_diag);
    }
    Ok(())
}
