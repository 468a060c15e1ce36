//! Simulate infinite swapping and parallel tempering and watch the weighted
//! empirical measure and the temperature association of particle 1.

use infswap::measure::total_variation;
use infswap::model::{AdjacencyKind, Grid, Potential};
use infswap::simulate::{simulate_ins, simulate_pt, SimOptions};
use infswap::swapchain::ProductChain;

fn main() -> infswap::Result<()> {
    let grid = Grid::uniform(-1.5, 1.5, 12, AdjacencyKind::NearestNeighbor)?;
    let potential = Potential::franz(&grid, 1.0)?;
    let chain = ProductChain::new(&grid, &potential, &[0.1, 0.5])?;
    let opts = SimOptions {
        record_path: false,
        checkpoints: 8,
        ..SimOptions::default()
    };
    let ins = simulate_ins(&chain, &[0, 0], 20_000.0, 7, opts)?;
    println!("infinite swapping");
    for cp in &ins.checkpoints {
        println!(
            "  T = {:>9.1}: TV(eta, mu) = {:.4}, beta_1 = {:.4}",
            cp.time,
            total_variation(&cp.eta, chain.mu()),
            cp.beta[0]
        );
    }
    let pt = simulate_pt(&chain, 10.0, &[0, 0], 20_000.0, 7, opts)?;
    let last = pt.checkpoints.last().expect("checkpoints requested");
    println!(
        "parallel tempering (swap rate 10): TV(eta, mu) = {:.4}, beta_1 = {:.4}, {} jumps",
        total_variation(&last.eta, chain.mu()),
        last.beta[0],
        pt.trajectory.jumps
    );
    Ok(())
}
