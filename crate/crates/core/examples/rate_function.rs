//! Evaluate the symmetric and weighted rate functions, and check that the
//! weighted rate of a measure equals the symmetric rate of its
//! symmetrization.

use infswap::ldp::{map_m, nu_sym, permute_measure, rate_i_unsym, rate_j, symmetry_discrepancy, SYMMETRY_TOL};
use infswap::model::{AdjacencyKind, Grid, Potential};
use infswap::swapchain::ProductChain;

fn main() -> infswap::Result<()> {
    let grid = Grid::uniform(-1.5, 1.5, 6, AdjacencyKind::NearestNeighbor)?;
    let potential = Potential::franz(&grid, 1.0)?;
    let chain = ProductChain::new(&grid, &potential, &[0.1, 0.5])?;
    let ins = chain.ins_generator()?;
    let size = chain.size();
    let uniform = vec![1.0 / size as f64; size];
    println!("J(uniform) = {:.6}", rate_j(&ins.rates, chain.mu_bar(), &uniform));
    println!("J(mu_bar)  = {:.3e}", rate_j(&ins.rates, chain.mu_bar(), chain.mu_bar()));

    // a symmetric measure tilted toward the right well, and the weighted
    // measure it induces
    let tilted: Vec<f64> = (0..size)
        .map(|x| chain.mu_bar()[x] * (1.0 + chain.positions(x).iter().sum::<f64>().max(0.0)))
        .collect();
    let total: f64 = tilted.iter().sum();
    let mut sym = vec![0.0; size];
    for s in 0..chain.num_permutations() {
        for (a, b) in sym.iter_mut().zip(permute_measure(&chain, &tilted, s)) {
            *a += b / (total * chain.num_permutations() as f64);
        }
    }
    let weighted = map_m(&chain, &sym)?;
    println!("symmetry discrepancy of the weighted measure: {:.1e}", symmetry_discrepancy(&chain, weighted.probs())?);
    println!("  weighted rate = {:.10}", rate_i_unsym(&chain, weighted.probs(), SYMMETRY_TOL)?);
    let back = nu_sym(&chain, weighted.probs(), SYMMETRY_TOL)?;
    println!("  symmetric rate of its symmetrization = {:.10}", rate_j(&ins.rates, chain.mu_bar(), back.probs()));
    println!("weighted rate of uniform = {}", rate_i_unsym(&chain, &uniform, SYMMETRY_TOL)?);
    Ok(())
}
