//! Long-run occupancy histogram against the binned invariant density.

use switchdiff::montecarlo::{estimate_invariant_histogram, SimConfig};
use switchdiff::spectral::InvariantDistribution;
use switchdiff::{wright_fisher_model, WrightFisherParams};

fn main() -> switchdiff::Result<()> {
    let p = WrightFisherParams::new(1.0, 1.0, 1.25, 2)?;
    let m = wright_fisher_model(p)?;
    let target = InvariantDistribution::new(&p)?.bin_masses(10)?;
    let cfg = SimConfig {
        horizon: 2000.0,
        n_paths: 1,
        seed: 3,
        ..SimConfig::default()
    };
    for i0 in [1, 2] {
        let h = estimate_invariant_histogram(&m, 0.5, i0, &cfg, 50.0, 10)?;
        println!("start phase {i0}: TV distance {:.4}, phase masses {:.4?}", h.tv_distance(&target)?, h.phase_masses());
    }
    Ok(())
}
