//! Solve an ergodic control problem, check the Bellman equation, and compare
//! with the long-horizon and Monte Carlo values.

use infswap::control::{
    bellman_residual, default_steps, fixed_point_residual, solve_ergodic, solve_finite_horizon,
    verify_representation, CostField,
};
use infswap::rates::RateMatrix;

fn main() -> infswap::Result<()> {
    // birth-death chain on four states, reversible for `pi`
    let rates = RateMatrix::from_dense(&[
        vec![0.0, 1.0, 0.0, 0.0],
        vec![2.0, 0.0, 1.5, 0.0],
        vec![0.0, 0.5, 0.0, 3.0],
        vec![0.0, 0.0, 1.0, 0.0],
    ])?;
    let pi = {
        let w = [1.0, 0.5, 1.5, 4.5];
        let s: f64 = w.iter().sum();
        w.map(|x| x / s)
    };
    let h = CostField::new(vec![0.0, 0.3, 1.0, 0.2])?;
    let sol = solve_ergodic(&rates, &pi, &h)?;
    println!("gamma = {:.10}", sol.gamma);
    println!("W = {:?}", sol.w);
    println!("Bellman residual {:.1e}, fixed-point residual {:.1e}", bellman_residual(&sol, &rates, &h), fixed_point_residual(&sol, &rates, &h));
    for horizon in [16.0, 64.0, 256.0] {
        let fh = solve_finite_horizon(&rates, &h, horizon, default_steps(horizon))?;
        let gap = fh.average_cost().iter().map(|c| (c - sol.gamma).abs()).fold(0.0, f64::max);
        println!("T = {horizon}: max |W^T(0)/T - gamma| = {gap:.3e}");
    }
    let report = verify_representation(&rates, &h, 1.0, 0, 20_000, 11)?;
    println!(
        "T = 1 from state 0: Monte Carlo {:.5} +- {:.5}, ODE {:.5}",
        report.monte_carlo, report.standard_error, report.ode_value
    );
    Ok(())
}
