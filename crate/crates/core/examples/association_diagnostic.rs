//! A lopsided particle-temperature association forces the weighted
//! empirical measure away from the product Gibbs measure.

use infswap::lagrange::{min_rate_given_association, RootOptions};
use infswap::ldp::AssociationLaw;
use infswap::model::{AdjacencyKind, Grid, Potential};
use infswap::swapchain::ProductChain;

fn main() -> infswap::Result<()> {
    let grid = Grid::uniform(-1.5, 1.5, 12, AdjacencyKind::NearestNeighbor)?;
    let potential = Potential::franz(&grid, 1.0)?;
    let chain = ProductChain::new(&grid, &potential, &[0.1, 0.5])?;
    println!("{:>6} {:>12} {:>12}", "w1", "rate", "distance");
    for w1 in [0.3, 0.4, 0.45, 0.5] {
        let res = min_rate_given_association(&chain, &AssociationLaw::pair(w1)?, RootOptions::default())?;
        println!("{w1:>6} {:>12.4e} {:>12.4e}", res.rate, res.distance.unwrap_or(f64::NAN));
    }
    Ok(())
}
