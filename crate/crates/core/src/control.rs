//! Ergodic and finite-horizon control of reversible jump processes with a
//! running cost.
//!
//! With `V = e^{-W}` the stationary Bellman equation
//! `sum_z r(y,z) (1 - e^{-(W(z) - W(y))}) + h(y) = gamma`
//! becomes the eigenproblem `(diag(q + h) - R) V = gamma V`. Reversibility
//! lets us symmetrize it with the square root of the stationary law, so
//! `gamma` is the lowest eigenvalue of a symmetric matrix and the optimally
//! controlled stationary law is the squared eigenvector.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{lowest_eigenpair, EigenMethod, SymSparse, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::measure::ProbMeasure;
use crate::rates::RateMatrix;
use crate::simulate::{path_integral, replica_rng};

/// Detailed-balance tolerance for accepting a generator as reversible.
pub const REVERSIBILITY_TOL: f64 = 1e-9;
/// Default backward-integration resolution.
pub const STEPS_PER_UNIT_TIME: f64 = 1e4;

/// Running cost per state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostField {
    values: Vec<f64>,
}

impl CostField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("cost", format!("non-finite entry {v}")));
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { values: vec![c; n] }
    }

    /// `lambda * g`.
    pub fn scaled(g: &[f64], lambda: f64) -> Self {
        Self {
            values: g.iter().map(|v| lambda * v).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn constant_value(&self) -> Option<f64> {
        let first = *self.values.first()?;
        self.values.iter().all(|&v| v == first).then_some(first)
    }
}

/// Optimal average cost `gamma`, value function `w` normalized so that
/// `sum mu e^{-2W} = 1`, optimally controlled stationary law `nu_bar` and the
/// optimal rates `u_bar(y, z) = r(y, z) e^{-(W(z) - W(y))}`.
#[derive(Debug, Clone)]
pub struct ErgodicSolution {
    pub gamma: f64,
    pub w: Vec<f64>,
    pub nu_bar: ProbMeasure,
    pub u_bar: RateMatrix,
    /// Reference stationary law the solution was computed against.
    pub stationary: Vec<f64>,
}

impl ErgodicSolution {
    /// `theta = nu_bar / mu = e^{-2W}`.
    pub fn theta(&self) -> Vec<f64> {
        self.w.iter().map(|w| (-2.0 * w).exp()).collect()
    }
}

fn check_inputs(rates: &RateMatrix, stationary: &[f64], h: &CostField) -> Result<()> {
    let n = rates.len();
    for len in [stationary.len(), h.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    if stationary.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::NotProbability("stationary law must be positive".into()));
    }
    if !rates.is_irreducible() {
        return Err(Error::param("generator", "not irreducible"));
    }
    let violation = rates.detailed_balance_violation(stationary);
    if violation > REVERSIBILITY_TOL {
        return Err(Error::NotReversible { violation });
    }
    Ok(())
}

/// `S = D^{1/2} (diag(q + h) - R) D^{-1/2}` with off-diagonals written as
/// `-sqrt(r(x,y) r(y,x))`, symmetric by construction.
fn symmetrized_operator(rates: &RateMatrix, h: &[f64]) -> SymSparse {
    let n = rates.len();
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut cols = Vec::with_capacity(rates.nnz());
    let mut vals = Vec::with_capacity(rates.nnz());
    for x in 0..n {
        for (y, r) in rates.row(x) {
            cols.push(y);
            vals.push(-(r * rates.rate(y, x)).sqrt());
        }
        row_ptr.push(cols.len());
    }
    SymSparse {
        diag: (0..n).map(|x| rates.exit_rate(x) + h[x]).collect(),
        row_ptr,
        cols,
        vals,
    }
}

/// Solve the ergodic control problem for a generator reversible with respect
/// to `stationary` (for example the infinite-swapping rates with the
/// symmetrized Gibbs measure).
pub fn solve_ergodic(rates: &RateMatrix, stationary: &[f64], h: &CostField) -> Result<ErgodicSolution> {
    solve_ergodic_with(rates, stationary, h, EigenMethod::Auto)
}

pub fn solve_ergodic_with(
    rates: &RateMatrix,
    stationary: &[f64],
    h: &CostField,
    method: EigenMethod,
) -> Result<ErgodicSolution> {
    check_inputs(rates, stationary, h)?;
    let n = rates.len();
    if let Some(c) = h.constant_value() {
        return Ok(ErgodicSolution {
            gamma: c,
            w: vec![0.0; n],
            nu_bar: ProbMeasure::from_vec_unchecked(stationary.to_vec()),
            u_bar: rates.clone(),
            stationary: stationary.to_vec(),
        });
    }
    let op = symmetrized_operator(rates, h.values());
    let start: Vec<f64> = stationary.iter().map(|p| p.sqrt()).collect();
    let (gamma, mut psi) = lowest_eigenpair(&op, &start, method)?;
    if psi.iter().sum::<f64>() < 0.0 {
        psi.iter_mut().for_each(|v| *v = -*v);
    }
    if let Some(bad) = psi.iter().position(|&v| v <= 0.0) {
        return Err(Error::Solver(format!(
            "principal eigenvector not positive at state {bad} ({:e})",
            psi[bad]
        )));
    }
    let mut w: Vec<f64> = psi
        .iter()
        .zip(stationary)
        .map(|(p, m)| -(p / m.sqrt()).ln())
        .collect();
    let mut gamma = gamma;
    if n <= DENSE_LIMIT {
        refine(rates, h.values(), &mut w, &mut gamma)?;
    }
    // fix the additive constant so that sum mu e^{-2W} = 1
    let log_mass = log_sum_exp(w.iter().zip(stationary).map(|(w, m)| m.ln() - 2.0 * w));
    w.iter_mut().for_each(|v| *v += 0.5 * log_mass);
    let nu_bar = ProbMeasure::normalized(
        w.iter().zip(stationary).map(|(w, m)| m * (-2.0 * w).exp()).collect(),
    )?;
    let u_bar = tilt_rates(rates, &w)?;
    Ok(ErgodicSolution {
        gamma,
        w,
        nu_bar,
        u_bar,
        stationary: stationary.to_vec(),
    })
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn bellman_terms(rates: &RateMatrix, h: &[f64], w: &[f64], gamma: f64) -> Vec<f64> {
    (0..rates.len())
        .map(|y| {
            let flow: f64 = rates.row(y).map(|(z, r)| r * (1.0 - (-(w[z] - w[y])).exp())).sum();
            flow + h[y] - gamma
        })
        .collect()
}

/// Newton iterations on the Bellman equation in the `(W, gamma)` variables.
///
/// The eigenvector carries only normwise accuracy, so where the controlled
/// law is tiny `W` can be off in relative terms. The Bellman residual is a
/// sum of rate ratios and stays accurate at every state, which lets a few
/// Newton steps restore a state-wise small residual.
fn refine(rates: &RateMatrix, h: &[f64], w: &mut [f64], gamma: &mut f64) -> Result<()> {
    let n = rates.len();
    // pin the best-determined state (smallest W, largest controlled mass)
    let pin = (0..n).min_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap_or(0);
    let mut res = bellman_terms(rates, h, w, *gamma);
    let mut best = res.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    for _ in 0..6 {
        if best < 1e-14 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n + 1, n + 1);
        for y in 0..n {
            for (z, r) in rates.row(y) {
                let t = r * (-(w[z] - w[y])).exp();
                jac[(y, z)] += t;
                jac[(y, y)] -= t;
            }
            jac[(y, n)] = -1.0;
        }
        jac[(n, pin)] = 1.0;
        let mut rhs = DVector::<f64>::zeros(n + 1);
        for y in 0..n {
            rhs[y] = -res[y];
        }
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(Error::Solver("singular Bellman Jacobian".into()));
        };
        let trial: Vec<f64> = (0..n).map(|y| w[y] + step[y]).collect();
        let trial_gamma = *gamma + step[n];
        let trial_res = bellman_terms(rates, h, &trial, trial_gamma);
        let trial_best = trial_res.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
        if !(trial_best < best) {
            break;
        }
        w.copy_from_slice(&trial);
        *gamma = trial_gamma;
        res = trial_res;
        best = trial_best;
    }
    Ok(())
}

fn tilt_rates(rates: &RateMatrix, w: &[f64]) -> Result<RateMatrix> {
    rates.map_rates(|y, z, r| r * (-(w[z] - w[y])).exp())
}

/// Optimal controlled rates `r(y,z) e^{-(W(z) - W(y))}`.
pub fn controlled_rates(solution: &ErgodicSolution, rates: &RateMatrix) -> Result<RateMatrix> {
    if solution.w.len() != rates.len() {
        return Err(Error::DimensionMismatch {
            expected: rates.len(),
            got: solution.w.len(),
        });
    }
    tilt_rates(rates, &solution.w)
}

/// Largest absolute residual of the stationary Bellman equation.
pub fn bellman_residual(solution: &ErgodicSolution, rates: &RateMatrix, h: &CostField) -> f64 {
    bellman_terms(rates, h.values(), &solution.w, solution.gamma)
        .into_iter()
        .fold(0.0, |a, r| a.max(r.abs()))
}

/// Largest relative residual of the optimality fixed point
/// `theta(x) = (sum_y r(x,y) theta(y)^{1/2})^2 / (q(x) + h(x) - gamma)^2`
/// for `theta = nu_bar / mu`.
pub fn fixed_point_residual(solution: &ErgodicSolution, rates: &RateMatrix, h: &CostField) -> f64 {
    let root: Vec<f64> = solution.w.iter().map(|w| (-w).exp()).collect();
    (0..rates.len())
        .map(|x| {
            let num: f64 = rates.row(x).map(|(y, r)| r * root[y]).sum();
            let den = rates.exit_rate(x) + h.values()[x] - solution.gamma;
            let rhs = (num / den).powi(2);
            let theta = root[x] * root[x];
            (theta - rhs).abs() / theta
        })
        .fold(0.0, f64::max)
}

/// Backward solution of `dV/dt + (L - h) V = 0`, `V(T) = 1`, sampled on a
/// uniform time grid.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteHorizonSolution {
    pub horizon: f64,
    /// Ascending sample times in `[0, T]`.
    pub times: Vec<f64>,
    /// `W^T(t, .) = -log V(t, .)` at each sample time.
    pub w: Vec<Vec<f64>>,
}

impl FiniteHorizonSolution {
    /// `W^T(0, .)`.
    pub fn w_initial(&self) -> &[f64] {
        &self.w[0]
    }

    /// `W^T(0, .) / T`, which approaches the ergodic cost as `T` grows.
    pub fn average_cost(&self) -> Vec<f64> {
        self.w[0].iter().map(|w| w / self.horizon).collect()
    }
}

/// Default step count for horizon `T`.
pub fn default_steps(horizon: f64) -> usize {
    (horizon * STEPS_PER_UNIT_TIME).ceil().max(1.0) as usize
}

/// Integrate the finite-horizon linear system backward from `T` with
/// classical Runge-Kutta, renormalizing each step and carrying the scale in
/// log form so `V` can span many orders of magnitude.
pub fn solve_finite_horizon(
    rates: &RateMatrix,
    h: &CostField,
    horizon: f64,
    steps: usize,
) -> Result<FiniteHorizonSolution> {
    let n = rates.len();
    if h.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.len() });
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::param("horizon", format!("{horizon} (need T > 0)")));
    }
    if steps == 0 {
        return Err(Error::param("steps", "need at least one step"));
    }
    let hv = h.values();
    let dt = horizon / steps as f64;
    let field = |v: &[f64], out: &mut [f64]| {
        for y in 0..n {
            let flow: f64 = rates.row(y).map(|(z, r)| r * (v[z] - v[y])).sum();
            out[y] = flow - hv[y] * v[y];
        }
    };
    let samples = steps.min(1000);
    let every = steps / samples;
    let mut v = vec![1.0; n];
    let mut log_scale = 0.0;
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];
    let snapshot = |v: &[f64], log_scale: f64| -> Vec<f64> { v.iter().map(|x| -(x.ln() + log_scale)).collect() };
    let mut rev_times = vec![horizon];
    let mut rev_w = vec![snapshot(&v, 0.0)];
    for step in 1..=steps {
        field(&v, &mut k[0]);
        for i in 0..n {
            tmp[i] = v[i] + 0.5 * dt * k[0][i];
        }
        field(&tmp, &mut k[1]);
        for i in 0..n {
            tmp[i] = v[i] + 0.5 * dt * k[1][i];
        }
        field(&tmp, &mut k[2]);
        for i in 0..n {
            tmp[i] = v[i] + dt * k[2][i];
        }
        field(&tmp, &mut k[3]);
        for i in 0..n {
            v[i] += dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        if let Some(bad) = v.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Solver(format!(
                "value lost positivity at state {bad} after {step} steps; increase steps"
            )));
        }
        let m = v.iter().copied().fold(0.0, f64::max);
        v.iter_mut().for_each(|x| *x /= m);
        log_scale += m.ln();
        if step % every == 0 || step == steps {
            let t = if step == steps { 0.0 } else { horizon - step as f64 * dt };
            if rev_times.last() != Some(&t) {
                rev_times.push(t);
                rev_w.push(snapshot(&v, log_scale));
            }
        }
    }
    rev_times.reverse();
    rev_w.reverse();
    Ok(FiniteHorizonSolution {
        horizon,
        times: rev_times,
        w: rev_w,
    })
}

/// Monte Carlo check of `-log E[exp(-int_0^T h(X))] = W^T(0, x0)`.
#[derive(Debug, Clone, Serialize)]
pub struct RepresentationReport {
    pub initial: usize,
    pub replicas: usize,
    pub monte_carlo: f64,
    /// Delta-method standard error of the Monte Carlo estimate.
    pub standard_error: f64,
    pub ode_value: f64,
    /// `|monte_carlo - ode_value| / standard_error` (0 when both agree exactly).
    pub z_score: f64,
}

impl RepresentationReport {
    pub fn agrees_within(&self, standard_errors: f64) -> bool {
        (self.monte_carlo - self.ode_value).abs() <= standard_errors * self.standard_error + 1e-12
    }
}

pub fn verify_representation(
    rates: &RateMatrix,
    h: &CostField,
    horizon: f64,
    initial: usize,
    replicas: usize,
    seed: u64,
) -> Result<RepresentationReport> {
    if initial >= rates.len() {
        return Err(Error::param("initial", format!("state {initial} outside 0..{}", rates.len())));
    }
    if replicas < 2 {
        return Err(Error::param("replicas", "need at least two replicas"));
    }
    let ode = solve_finite_horizon(rates, h, horizon, default_steps(horizon))?;
    let samples: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|stream| {
            let mut rng = replica_rng(seed, stream);
            path_integral(rates, initial, horizon, h.values(), &mut rng).map(|f| (-f).exp())
        })
        .collect::<Result<_>>()?;
    let nf = replicas as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let se = (var / nf).sqrt() / mean;
    let mc = -mean.ln();
    let ode_value = ode.w_initial()[initial];
    let diff = (mc - ode_value).abs();
    Ok(RepresentationReport {
        initial,
        replicas,
        monte_carlo: mc,
        standard_error: se,
        ode_value,
        z_score: if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY },
    })
}
