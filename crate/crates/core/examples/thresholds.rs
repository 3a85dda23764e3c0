//! Phase thresholds where forward and backward switching rates balance.

use switchdiff::functionals::tendency_analysis;
use switchdiff::WrightFisherParams;

fn main() -> switchdiff::Result<()> {
    for k in [0.25, 0.75, 1.25, 1.75] {
        let r = tendency_analysis(&WrightFisherParams::new(0.5, 1.0, k, 5)?);
        let x0: Vec<String> = r
            .thresholds
            .iter()
            .map(|t| match t.x0 {
                Some(x) if x < 1.0 => format!("{x:.3}"),
                Some(_) => "fwd".to_string(),
                None => "-".to_string(),
            })
            .collect();
        println!("k = {k:<4}  {:<12?}  {}", r.regime, x0.join("  "));
    }
    Ok(())
}
