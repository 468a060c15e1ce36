//! Value function and jump tilts of the single-temperature problem that
//! pushes mass out of the right well.

use infswap::lagrange::{min_rate_given_mass_single_temp, right_well, single_temp_setup, RootOptions};
use infswap::model::mass_right;

fn main() -> infswap::Result<()> {
    let (grid, chain) = single_temp_setup(-1.5, 1.5, 50, 1.0, 0.1)?;
    let kappa = mass_right(&chain.stationary.probs, &grid)?;
    for delta in [0.05, 0.2] {
        let res = min_rate_given_mass_single_temp(&chain, &right_well(&grid), kappa * (1.0 - delta), RootOptions::default())?;
        println!("delta = {delta}: rate = {:.4e}", res.result.rate);
        println!("{:>8} {:>10} {:>10} {:>10}", "x", "W", "right", "left");
        for i in (0..grid.len()).step_by(7) {
            println!(
                "{:>8.3} {:>10.5} {:>10.5} {:>10.5}",
                grid.points()[i],
                res.result.solution.w[i],
                res.right_tilt[i],
                res.left_tilt[i]
            );
        }
    }
    Ok(())
}
