//! Hitting probabilities and expected exit times from boundary value problems.

use switchdiff::functionals::{all_ones, richardson_ratio, solve_exit_time, solve_hitting};
use switchdiff::{wright_fisher_model, WrightFisherParams};

fn main() -> switchdiff::Result<()> {
    let m = wright_fisher_model(WrightFisherParams::new(0.5, 0.5, 0.7, 3)?)?;
    let (c, d) = (0.2, 0.8);
    let u = solve_hitting(&m, c, d, 401)?;
    let v = solve_exit_time(&m, c, d, &all_ones(3), 401)?;
    for x in [0.3, 0.5, 0.7] {
        let (ux, vx) = (u.value_at(x)?, v.value_at(x)?);
        println!("x = {x}: P(hit {d} first) by start phase {:.5?}", ux.row_sums());
        println!("        E[exit time] by start phase {:.5?}", (0..3).map(|i| vx[(i, 0)]).collect::<Vec<_>>());
    }
    let ratio = richardson_ratio(|g| solve_hitting(&m, c, d, g), 51)?;
    println!("Richardson ratio {ratio:.3}");
    Ok(())
}
