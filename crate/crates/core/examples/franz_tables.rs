//! Constrained rates over the asymmetry sweep of the double well.

use infswap::lagrange::{table_experiments, TableConfig};

fn main() -> infswap::Result<()> {
    let data = table_experiments(&TableConfig::default())?;
    println!("{:>7} {}", "alpha", data.alphas.iter().map(|a| format!("{a:>11}")).collect::<String>());
    println!("{:>7} {}", "kappa", data.kappa.iter().map(|k| format!("{k:>11.4}")).collect::<String>());
    for (d, row) in data.deltas.iter().zip(&data.rates) {
        println!("{d:>7} {}", row.iter().map(|r| format!("{r:>11.4e}")).collect::<String>());
    }
    println!("normalized by the symmetric well:");
    for (d, row) in data.deltas.iter().zip(&data.normalized) {
        println!("{d:>7} {}", row.iter().map(|r| format!("{r:>11.4}")).collect::<String>());
    }
    Ok(())
}
