//! Invariant density components for two to five phases.

use switchdiff::spectral::InvariantDistribution;
use switchdiff::WrightFisherParams;

fn main() -> switchdiff::Result<()> {
    for n in 2..=5 {
        let inv = InvariantDistribution::new(&WrightFisherParams::new(1.0, 1.0, 1.25, n)?)?;
        let s = inv.summary();
        let masses: Vec<String> = s.phase_masses.iter().map(|m| format!("{m:.4}")).collect();
        println!("N = {n}: phase masses {}", masses.join(" "));
        let worst = (1..20)
            .map(|i| inv.stationarity_residual(i as f64 / 20.0))
            .collect::<switchdiff::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("       stationarity residual {worst:.1e}");
    }
    Ok(())
}
