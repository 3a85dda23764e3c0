//! Sample paths and a Monte Carlo check of the spectral probabilities.

use switchdiff::montecarlo::{estimate_transition_probability, simulate_path, SimConfig};
use switchdiff::spectral::SpectralBasis;
use switchdiff::{wright_fisher_model, WrightFisherParams};

fn main() -> switchdiff::Result<()> {
    let p = WrightFisherParams::new(0.0, 0.0, 0.5, 4)?;
    let m = wright_fisher_model(p)?;
    let cfg = SimConfig {
        step: 1e-3,
        horizon: 1.0,
        n_paths: 20_000,
        seed: 42,
        ..SimConfig::default()
    };
    let path = simulate_path(&m, 0.5, 1, &SimConfig { horizon: 10.0, ..cfg })?;
    println!("one path: {} phase changes, occupancy {:.3?}", path.jump_times.len(), path.occupancy(4));

    let est = estimate_transition_probability(&m, 0.5, 1.0, (0.75, 1.0), &cfg)?;
    let exact = SpectralBasis::wright_fisher(&p, 12)?.transition_probability(1.0, 0.5, (0.75, 1.0))?;
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| format!("{:.4}±{:.4} ({:.4})", est.mean[(i, j)], est.std_error[(i, j)], exact[(i, j)]))
            .collect();
        println!("  {}", row.join("  "));
    }
    Ok(())
}
