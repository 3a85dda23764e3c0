//! Interval transition probabilities for four phases, and how few
//! eigenfunctions they need.

use switchdiff::spectral::SpectralBasis;
use switchdiff::WrightFisherParams;

fn main() -> switchdiff::Result<()> {
    let p = WrightFisherParams::new(0.0, 0.0, 0.5, 4)?;
    let basis = SpectralBasis::wright_fisher(&p, 12)?;
    let probs = basis.transition_probability(1.0, 0.5, (0.75, 1.0))?;
    println!("Pr(X_1 in (3/4, 1), Y_1 = j | X_0 = 1/2, Y_0 = i):");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:.8}", probs[(i, j)])).collect();
        println!("  {}", row.join("  "));
    }
    for m in [1, 2, 3, 6] {
        let d = basis.truncated(m)?.transition_probability(1.0, 0.5, (0.75, 1.0))?.max_abs_diff(&probs);
        println!("M = {m:>2}: max difference to M = 12 is {d:.2e}");
    }
    println!("orthonormality defect {:.2e}", basis.orthonormality_defect()?);
    Ok(())
}
