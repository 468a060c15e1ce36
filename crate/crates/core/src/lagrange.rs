//! Rate minimization under one linear constraint `<g, nu> = target`.
//!
//! The constrained minimizer of `J` is the optimally controlled stationary
//! law for the running cost `lambda g`, and `<g, nu*_lambda>` is
//! nonincreasing in `lambda`. The multiplier is found by bracketing and
//! bisection; monotonicity is checked on every evaluation so a broken inner
//! solve aborts instead of yielding a wrong root.

use rayon::prelude::*;
use serde::Serialize;

use crate::control::{bellman_residual, solve_ergodic, CostField, ErgodicSolution};
use crate::error::{Error, Result};
use crate::ldp::{map_m, rate_j, AssociationLaw};
use crate::measure::{total_variation, ProbMeasure};
use crate::model::{gibbs, glauber_rates, mass_right, AdjacencyKind, Grid, Potential, SingleTempChain};
use crate::rates::RateMatrix;
use crate::swapchain::ProductChain;

/// `<coefficients, nu> = target`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearConstraint {
    pub coefficients: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootOptions {
    /// Accepted `|<g, nu*> - target|`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConstrainedResult {
    pub lambda: f64,
    pub nu: ProbMeasure,
    pub achieved: f64,
    pub target: f64,
    /// `J(nu*)`, the rate of the minimizer (not the scalarized objective).
    pub rate: f64,
    /// `M(nu*)` for product-chain problems.
    pub image: Option<ProbMeasure>,
    /// Total variation between `M(nu*)` and the product Gibbs measure.
    pub distance: Option<f64>,
    pub iterations: usize,
    pub bellman_residual: f64,
    pub solution: ErgodicSolution,
}

struct Eval {
    lambda: f64,
    value: f64,
    solution: ErgodicSolution,
}

fn evaluate(rates: &RateMatrix, stationary: &[f64], g: &[f64], lambda: f64) -> Result<Eval> {
    let solution = solve_ergodic(rates, stationary, &CostField::scaled(g, lambda))?;
    let value = solution.nu_bar.expect(g);
    Ok(Eval {
        lambda,
        value,
        solution,
    })
}

/// Slack allowed when checking monotonicity of `<g, nu*_lambda>`.
const MONOTONE_SLACK: f64 = 1e-12;

/// Minimize `J` for the chain `rates` (reversible for `stationary`) subject
/// to the constraint.
pub fn minimize_with_constraint(
    rates: &RateMatrix,
    stationary: &[f64],
    constraint: &LinearConstraint,
    opts: RootOptions,
) -> Result<ConstrainedResult> {
    let g = &constraint.coefficients;
    let target = constraint.target;
    if g.len() != rates.len() {
        return Err(Error::DimensionMismatch {
            expected: rates.len(),
            got: g.len(),
        });
    }
    let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(target > lo && target < hi) {
        return Err(Error::TargetOutOfRange {
            target,
            min: lo,
            max: hi,
        });
    }
    let tol = opts.tolerance;
    let mut iterations = 1;
    let base = evaluate(rates, stationary, g, 0.0)?;
    let finish = |e: Eval, iterations: usize| -> Result<ConstrainedResult> {
        let h = CostField::scaled(g, e.lambda);
        Ok(ConstrainedResult {
            lambda: e.lambda,
            rate: rate_j(rates, stationary, e.solution.nu_bar.probs()),
            nu: e.solution.nu_bar.clone(),
            achieved: e.value,
            target,
            image: None,
            distance: None,
            iterations,
            bellman_residual: bellman_residual(&e.solution, rates, &h),
            solution: e.solution,
        })
    };
    if (base.value - target).abs() <= tol {
        return finish(base, iterations);
    }
    // value decreases with lambda: move right if above the target
    let dir = if base.value > target { 1.0 } else { -1.0 };
    let mut inner = base;
    let mut step = 1.0;
    let outer = loop {
        let e = evaluate(rates, stationary, g, dir * step)?;
        iterations += 1;
        if dir * (e.value - inner.value) > MONOTONE_SLACK {
            return Err(Error::NonMonotone(format!(
                "constraint value {} at lambda {} but {} at lambda {}",
                inner.value, inner.lambda, e.value, e.lambda
            )));
        }
        if (e.value - target).abs() <= tol {
            return finish(e, iterations);
        }
        if dir * (e.value - target) < 0.0 {
            break e;
        }
        if iterations >= opts.max_iterations || step > 1e12 {
            return Err(Error::BracketFailure(format!(
                "no sign change up to lambda {}; constraint value {}",
                dir * step,
                e.value
            )));
        }
        inner = e;
        step *= 2.0;
    };
    // inner.value is on the starting side of the target, outer.value past it
    let (mut a, mut b) = (inner, outer);
    while iterations < opts.max_iterations {
        let mid = 0.5 * (a.lambda + b.lambda);
        if mid == a.lambda || mid == b.lambda {
            break;
        }
        let e = evaluate(rates, stationary, g, mid)?;
        iterations += 1;
        let (vmax, vmin) = if a.lambda < b.lambda { (a.value, b.value) } else { (b.value, a.value) };
        if e.value > vmax + MONOTONE_SLACK || e.value < vmin - MONOTONE_SLACK {
            return Err(Error::NonMonotone(format!(
                "constraint value {} at lambda {} outside [{}, {}]",
                e.value, mid, vmin, vmax
            )));
        }
        if (e.value - target).abs() <= tol {
            return finish(e, iterations);
        }
        if dir * (e.value - target) > 0.0 {
            a = e;
        } else {
            b = e;
        }
    }
    let best = if (a.value - target).abs() < (b.value - target).abs() { a } else { b };
    Err(Error::Solver(format!(
        "bisection stopped after {iterations} evaluations with constraint error {:e} at lambda {}",
        (best.value - target).abs(),
        best.lambda
    )))
}

fn require_k(chain: &ProductChain, k: usize) -> Result<()> {
    if chain.k() != k {
        return Err(Error::TemperatureCount {
            required: k,
            actual: chain.k(),
        });
    }
    Ok(())
}

fn attach_image(chain: &ProductChain, mut res: ConstrainedResult) -> Result<ConstrainedResult> {
    if res.lambda == 0.0 {
        // unconstrained minimizer: nu* is the symmetrized law exactly and its
        // image is the product measure
        res.image = Some(chain.product_measure());
        res.distance = Some(0.0);
    } else {
        let image = map_m(chain, res.nu.probs())?;
        res.distance = Some(total_variation(image.probs(), chain.mu()));
        res.image = Some(image);
    }
    Ok(res)
}

/// Smallest rate of the infinite-swapping empirical measure among measures
/// whose particle-temperature association is `w_bar` (two temperatures).
pub fn min_rate_given_association(
    chain: &ProductChain,
    w_bar: &AssociationLaw,
    opts: RootOptions,
) -> Result<ConstrainedResult> {
    require_k(chain, 2)?;
    let w = w_bar.weights();
    if w.len() != 2 || !(w[0] > 0.0 && w[0] < 1.0) {
        return Err(Error::param("association", format!("{w:?} (need both weights in (0, 1))")));
    }
    let ins = chain.ins_generator()?;
    let constraint = LinearConstraint {
        coefficients: (0..chain.size()).map(|x| chain.rho_identity(x)).collect(),
        target: w[0],
    };
    let res = minimize_with_constraint(&ins.rates, chain.mu_bar(), &constraint, opts)?;
    attach_image(chain, res)
}

/// `g(x) = sum_sigma rho(x^sigma) 1{(x^sigma)_1 in region}`, so that
/// `<g, nu>` is the mass `M(nu)` puts in the region on the lowest
/// temperature.
pub fn mass_coefficients(chain: &ProductChain, region: &[bool]) -> Result<Vec<f64>> {
    if region.len() != chain.n() {
        return Err(Error::DimensionMismatch {
            expected: chain.n(),
            got: region.len(),
        });
    }
    let n = chain.n();
    let stride = n.pow(chain.k() as u32 - 1);
    Ok((0..chain.size())
        .map(|x| {
            (0..chain.num_permutations())
                .map(|s| {
                    let y = chain.permuted(x, s);
                    if region[y / stride] {
                        chain.rho_at(x, s)
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect())
}

/// Smallest rate among infinite-swapping empirical measures whose
/// unsymmetrized image puts mass `target` in `region` at the lowest
/// temperature.
pub fn min_rate_given_mass(
    chain: &ProductChain,
    region: &[bool],
    target: f64,
    opts: RootOptions,
) -> Result<ConstrainedResult> {
    require_k(chain, 2)?;
    let ins = chain.ins_generator()?;
    let constraint = LinearConstraint {
        coefficients: mass_coefficients(chain, region)?,
        target,
    };
    let res = minimize_with_constraint(&ins.rates, chain.mu_bar(), &constraint, opts)?;
    attach_image(chain, res)
}

/// Single-temperature constrained minimizer with the control tilts of
/// nearest-neighbor jumps.
#[derive(Debug, Clone)]
pub struct SingleTempResult {
    pub result: ConstrainedResult,
    /// `e^{W(x_{i+1}) - W(x_i)}`; 1 at the right edge.
    pub right_tilt: Vec<f64>,
    /// `e^{W(x_{i-1}) - W(x_i)}`; 1 at the left edge.
    pub left_tilt: Vec<f64>,
}

pub fn min_rate_given_mass_single_temp(
    chain: &SingleTempChain,
    region: &[bool],
    target: f64,
    opts: RootOptions,
) -> Result<SingleTempResult> {
    let n = chain.rates.len();
    if region.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: region.len(),
        });
    }
    let constraint = LinearConstraint {
        coefficients: region.iter().map(|&r| if r { 1.0 } else { 0.0 }).collect(),
        target,
    };
    let result = minimize_with_constraint(&chain.rates, &chain.stationary.probs, &constraint, opts)?;
    let w = &result.solution.w;
    let right_tilt = (0..n)
        .map(|i| if i + 1 < n { (w[i + 1] - w[i]).exp() } else { 1.0 })
        .collect();
    let left_tilt = (0..n)
        .map(|i| if i > 0 { (w[i - 1] - w[i]).exp() } else { 1.0 })
        .collect();
    Ok(SingleTempResult {
        result,
        right_tilt,
        left_tilt,
    })
}

/// Grid points with `x >= 0`, the right well including a barrier point at
/// the origin if present.
pub fn right_well(grid: &Grid) -> Vec<bool> {
    grid.points().iter().map(|&x| x >= 0.0).collect()
}

/// Inputs of the asymmetry sweep: a constrained rate for every
/// `(alpha, delta)` with target mass `kappa(alpha) (1 - delta)` in the right
/// well at the lowest temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableConfig {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub temperatures: Vec<f64>,
    pub alphas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub root: RootOptions,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            lo: -1.5,
            hi: 1.5,
            n: 12,
            temperatures: vec![0.1, 0.5],
            alphas: vec![1.0, 0.97, 0.95, 0.90, 0.85],
            deltas: vec![0.05, 0.10, 0.15, 0.20],
            root: RootOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellInfo {
    pub alpha: f64,
    pub delta: f64,
    pub target: f64,
    pub achieved: f64,
    pub rate: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub bellman_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableData {
    pub grid_points: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub alphas: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Gibbs mass of `x >= 0` at the lowest temperature, per alpha.
    pub kappa: Vec<f64>,
    /// `rates[d][a]` for `deltas[d]`, `alphas[a]`.
    pub rates: Vec<Vec<f64>>,
    /// `rates[d][a] / rates[d][0]`.
    pub normalized: Vec<Vec<f64>>,
    pub cells: Vec<CellInfo>,
}

pub fn table_experiments(cfg: &TableConfig) -> Result<TableData> {
    if cfg.temperatures.len() != 2 {
        return Err(Error::TemperatureCount {
            required: 2,
            actual: cfg.temperatures.len(),
        });
    }
    if cfg.alphas.is_empty() || cfg.deltas.is_empty() {
        return Err(Error::param("tables", "need at least one alpha and one delta"));
    }
    if let Some(d) = cfg.deltas.iter().find(|d| !(**d >= 0.0 && **d < 1.0)) {
        return Err(Error::param("delta", format!("{d} outside [0, 1)")));
    }
    let grid = Grid::uniform(cfg.lo, cfg.hi, cfg.n, AdjacencyKind::NearestNeighbor)?;
    let region = right_well(&grid);
    let chains: Vec<(ProductChain, f64)> = cfg
        .alphas
        .iter()
        .map(|&alpha| {
            let p = Potential::franz(&grid, alpha)?;
            let chain = ProductChain::new(&grid, &p, &cfg.temperatures)?;
            let kappa = mass_right(&gibbs(&p, &grid, cfg.temperatures[0])?.probs, &grid)?;
            Ok((chain, kappa))
        })
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..cfg.deltas.len())
        .flat_map(|d| (0..cfg.alphas.len()).map(move |a| (d, a)))
        .collect();
    let solved: Vec<CellInfo> = cells
        .par_iter()
        .map(|&(d, a)| {
            let (chain, kappa) = &chains[a];
            let (alpha, delta) = (cfg.alphas[a], cfg.deltas[d]);
            let target = kappa * (1.0 - delta);
            let r = min_rate_given_mass(chain, &region, target, cfg.root)
                .map_err(|e| Error::Solver(format!("cell alpha = {alpha}, delta = {delta}: {e}")))?;
            Ok(CellInfo {
                alpha,
                delta,
                target,
                achieved: r.achieved,
                rate: r.rate,
                lambda: r.lambda,
                iterations: r.iterations,
                bellman_residual: r.bellman_residual,
            })
        })
        .collect::<Result<_>>()?;
    let na = cfg.alphas.len();
    let rates: Vec<Vec<f64>> = (0..cfg.deltas.len())
        .map(|d| (0..na).map(|a| solved[d * na + a].rate).collect())
        .collect();
    let normalized = rates
        .iter()
        .map(|row| row.iter().map(|r| if row[0] > 0.0 { r / row[0] } else { f64::NAN }).collect())
        .collect();
    Ok(TableData {
        grid_points: grid.points().to_vec(),
        temperatures: cfg.temperatures.clone(),
        alphas: cfg.alphas.clone(),
        deltas: cfg.deltas.clone(),
        kappa: chains.iter().map(|(_, k)| *k).collect(),
        rates,
        normalized,
        cells: solved,
    })
}

/// Single-temperature Glauber chain and its right-well region for the
/// value-function experiment.
pub fn single_temp_setup(lo: f64, hi: f64, n: usize, alpha: f64, tau: f64) -> Result<(Grid, SingleTempChain)> {
    let grid = Grid::uniform(lo, hi, n, AdjacencyKind::NearestNeighbor)?;
    let p = Potential::franz(&grid, alpha)?;
    let chain = glauber_rates(&p, &grid, tau)?;
    Ok((grid, chain))
}
