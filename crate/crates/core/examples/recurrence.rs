//! Recurrence evidence from shrinking target margins.

use switchdiff::functionals::{classify_recurrence, DEFAULT_EPSILONS};
use switchdiff::{wright_fisher_model, WrightFisherParams};

fn main() -> switchdiff::Result<()> {
    for alpha in [1.0, 0.0, -0.5] {
        let m = wright_fisher_model(WrightFisherParams::new(alpha, 1.0, 1.25, 2)?)?;
        let r = classify_recurrence(&m, &DEFAULT_EPSILONS)?;
        println!("alpha = {alpha}: {}", r.verdict);
        for (i, e) in r.epsilons.iter().enumerate() {
            println!("  eps {e:.0e}  deficits {:.3e} / {:.3e}", r.lower.deficits[i], r.upper.deficits[i]);
        }
    }
    Ok(())
}
