//! The infinite-swapping generator is reversible for the symmetrized Gibbs
//! measure, and its swap weights sum to one.

use infswap::model::{AdjacencyKind, Grid, Potential};
use infswap::swapchain::ProductChain;

fn main() -> infswap::Result<()> {
    let grid = Grid::uniform(-1.5, 1.5, 8, AdjacencyKind::NearestNeighbor)?;
    let potential = Potential::franz(&grid, 0.95)?;
    for temps in [vec![0.1, 0.5], vec![0.1, 0.25, 0.5]] {
        let chain = ProductChain::new(&grid, &potential, &temps)?;
        let ins = chain.ins_generator()?;
        let weight_error = (0..chain.size())
            .map(|x| {
                let s: f64 = (0..chain.num_permutations()).map(|p| chain.rho_at(x, p)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max);
        println!(
            "K = {}: {} states, {} transitions, reversibility violation {:.1e}, swap weight error {:.1e}",
            chain.k(),
            chain.size(),
            ins.rates.nnz(),
            ins.rates.detailed_balance_violation(chain.mu_bar()),
            weight_error
        );
    }
    let chain = ProductChain::new(&grid, &potential, &[0.1, 0.5])?;
    let (lo, hi) = (0, grid.len() - 1);
    println!(
        "swap acceptance from ({lo}, {hi}) = {:.3e}, from ({hi}, {lo}) = {:.3e}",
        chain.swap_prob_b(&[lo, hi])?,
        chain.swap_prob_b(&[hi, lo])?
    );
    Ok(())
}
