//! Gibbs measures and Glauber rates of the double well at two temperatures.

use infswap::model::{gibbs, glauber_rates, mass_right, AdjacencyKind, Grid, Potential};

fn main() -> infswap::Result<()> {
    let grid = Grid::uniform(-1.5, 1.5, 12, AdjacencyKind::NearestNeighbor)?;
    for alpha in [1.0, 0.9] {
        let potential = Potential::franz(&grid, alpha)?;
        println!("alpha = {alpha}");
        for tau in [0.1, 0.5] {
            let mu = gibbs(&potential, &grid, tau)?;
            let chain = glauber_rates(&potential, &grid, tau)?;
            let violation = chain.rates.detailed_balance_violation(&mu.probs);
            println!(
                "  tau = {tau}: mass on x >= 0 = {:.4}, max exit rate = {:.3}, detailed balance violation = {violation:.1e}",
                mass_right(&mu.probs, &grid)?,
                chain.exit_rates().iter().cloned().fold(0.0, f64::max),
            );
        }
    }
    Ok(())
}
