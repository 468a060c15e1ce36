//! Exact continuous-time simulation of the uncoupled, parallel-tempering and
//! infinite-swapping processes, with holding-time weighted occupation
//! accumulators.
//!
//! Randomness comes from `ChaCha8Rng` seeded by `(seed, stream)`: the seed
//! names an experiment and the stream a replica, so replicas run in parallel
//! without sharing state and every replica is reproducible on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rates::RateMatrix;
use crate::swapchain::ProductChain;

/// Generator for replica `stream` of experiment `seed`.
pub fn replica_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn exp_sample<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Pick an index with probability proportional to `weights`, given the total.
fn pick<R: Rng>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    // rounding: fall back to the last positive weight
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Piecewise-constant path on `[0, horizon]`.
///
/// `times[0] = 0` and `states[0]` is the initial state; `states[i]` holds on
/// `[times[i], times[i+1])`. For the parallel-tempering process `labels[i]`
/// is the index of the temperature assignment in effect. When path recording
/// is off only the initial entry is kept, but `jumps` still counts every jump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    pub stream: u64,
    pub times: Vec<f64>,
    pub states: Vec<usize>,
    pub labels: Vec<usize>,
    pub horizon: f64,
    pub jumps: u64,
}

impl Trajectory {
    fn start(seed: u64, stream: u64, initial: usize, label: Option<usize>, horizon: f64) -> Self {
        Self {
            seed,
            stream,
            times: vec![0.0],
            states: vec![initial],
            labels: label.into_iter().collect(),
            horizon,
            jumps: 0,
        }
    }

    fn record(&mut self, on: bool, t: f64, state: usize, label: Option<usize>) {
        self.jumps += 1;
        if on {
            self.times.push(t);
            self.states.push(state);
            if let Some(l) = label {
                self.labels.push(l);
            }
        }
    }

    /// State at time `t` (requires a recorded path).
    pub fn state_at(&self, t: f64) -> usize {
        let i = self.times.partition_point(|&s| s <= t);
        self.states[i.saturating_sub(1)]
    }

    /// Time-normalized occupation measure over `n` states.
    pub fn occupation(&self, n: usize) -> Vec<f64> {
        let mut occ = vec![0.0; n];
        for (i, &s) in self.states.iter().enumerate() {
            let end = self.times.get(i + 1).copied().unwrap_or(self.horizon);
            occ[s] += end - self.times[i];
        }
        occ.iter_mut().for_each(|v| *v /= self.horizon);
        occ
    }
}

/// Raw time integrals of the empirical measures of one run (or a merged set
/// of runs). Normalized views divide by `time`.
///
/// For infinite swapping `nu` is the occupation of the simulated process,
/// `eta` the weighted empirical measure, and `rho` the time integral of the
/// swap weights. For parallel tempering `nu` is the occupation of the
/// particle-labelled process, `eta` the occupation of the
/// temperature-ordered state, and `rho` the time spent in each temperature
/// assignment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationAccumulators {
    pub time: f64,
    pub nu: Vec<f64>,
    pub eta: Vec<f64>,
    pub rho: Vec<f64>,
    k: usize,
}

impl OccupationAccumulators {
    pub fn new(states: usize, k: usize) -> Self {
        Self {
            time: 0.0,
            nu: vec![0.0; states],
            eta: vec![0.0; states],
            rho: vec![0.0; crate::perm::factorial(k)],
            k,
        }
    }

    fn scaled(v: &[f64], t: f64) -> Vec<f64> {
        v.iter().map(|x| x / t).collect()
    }

    pub fn nu_t(&self) -> Vec<f64> {
        Self::scaled(&self.nu, self.time)
    }

    pub fn eta_t(&self) -> Vec<f64> {
        Self::scaled(&self.eta, self.time)
    }

    pub fn rho_t(&self) -> Vec<f64> {
        Self::scaled(&self.rho, self.time)
    }

    pub fn beta_t(&self) -> Vec<f64> {
        beta_from_rho(&self.rho_t(), self.k)
    }

    /// Associative merge of independent runs (time-weighted pooling).
    pub fn merge(&mut self, other: &Self) {
        self.time += other.time;
        for (a, b) in self.nu.iter_mut().zip(&other.nu) {
            *a += b;
        }
        for (a, b) in self.eta.iter_mut().zip(&other.eta) {
            *a += b;
        }
        for (a, b) in self.rho.iter_mut().zip(&other.rho) {
            *a += b;
        }
    }
}

/// Normalized accumulator state at one checkpoint time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub time: f64,
    pub nu: Vec<f64>,
    pub eta: Vec<f64>,
    pub rho: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Checkpoint {
    fn of(acc: &OccupationAccumulators) -> Self {
        Self {
            time: acc.time,
            nu: acc.nu_t(),
            eta: acc.eta_t(),
            rho: acc.rho_t(),
            beta: acc.beta_t(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub stream: u64,
    pub record_path: bool,
    /// Snapshots at `T 2^{-k}` for `k = checkpoints - 1, ..., 0`.
    pub checkpoints: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            stream: 0,
            record_path: true,
            checkpoints: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutput {
    pub trajectory: Trajectory,
    pub accumulators: OccupationAccumulators,
    pub checkpoints: Vec<Checkpoint>,
}

/// Geometric snapshot times `T 2^{-k}`, ascending and ending at `T`.
pub fn checkpoint_times(horizon: f64, count: usize) -> Vec<f64> {
    (0..count).rev().map(|k| horizon * 0.5f64.powi(k as i32)).collect()
}

/// Splits holding intervals at checkpoint times and snapshots accumulators.
struct Schedule {
    times: Vec<f64>,
    next: usize,
    snaps: Vec<Checkpoint>,
}

impl Schedule {
    fn new(horizon: f64, count: usize) -> Self {
        Self {
            times: checkpoint_times(horizon, count),
            next: 0,
            snaps: Vec::new(),
        }
    }

    /// Feed a holding interval `[t0, t0 + dt)`; `add` integrates a piece.
    fn hold(
        &mut self,
        acc: &mut OccupationAccumulators,
        t0: f64,
        dt: f64,
        mut add: impl FnMut(&mut OccupationAccumulators, f64),
    ) {
        let end = t0 + dt;
        let mut cur = t0;
        while self.next < self.times.len() && self.times[self.next] <= end {
            let piece = self.times[self.next] - cur;
            if piece > 0.0 {
                add(acc, piece);
                acc.time += piece;
            }
            cur = self.times[self.next];
            self.snaps.push(Checkpoint::of(acc));
            self.next += 1;
        }
        if end > cur {
            add(acc, end - cur);
            acc.time += end - cur;
        }
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::param("horizon", format!("{horizon} (need T > 0)")));
    }
    Ok(())
}

/// Drive a jump process: `on_hold(state, t0, dt)` sees every holding interval
/// clipped to the horizon, `on_jump(t, to)` every jump.
fn run_ctmc<R: Rng>(
    rates: &RateMatrix,
    initial: usize,
    horizon: f64,
    rng: &mut R,
    mut on_hold: impl FnMut(usize, f64, f64),
    mut on_jump: impl FnMut(f64, usize),
) -> Result<()> {
    let mut t = 0.0;
    let mut x = initial;
    loop {
        let q = rates.exit_rate(x);
        if q <= 0.0 {
            return Err(Error::AbsorbingState(x));
        }
        let dt = exp_sample(rng, q);
        if t + dt >= horizon {
            on_hold(x, t, horizon - t);
            return Ok(());
        }
        on_hold(x, t, dt);
        t += dt;
        let (cols, vals) = rates.row_slices(x);
        x = cols[pick(rng, vals, q)];
        on_jump(t, x);
    }
}

/// Simulate the jump process with off-diagonal rates `rates` from `initial`
/// on `[0, horizon]`, recording the full path.
pub fn simulate_ctmc(rates: &RateMatrix, initial: usize, horizon: f64, seed: u64) -> Result<Trajectory> {
    simulate_ctmc_with(rates, initial, horizon, seed, SimOptions::default())
}

pub fn simulate_ctmc_with(
    rates: &RateMatrix,
    initial: usize,
    horizon: f64,
    seed: u64,
    opts: SimOptions,
) -> Result<Trajectory> {
    check_horizon(horizon)?;
    if initial >= rates.len() {
        return Err(Error::param("initial", format!("state {initial} outside 0..{}", rates.len())));
    }
    let mut rng = replica_rng(seed, opts.stream);
    let mut traj = Trajectory::start(seed, opts.stream, initial, None, horizon);
    run_ctmc(rates, initial, horizon, &mut rng, |_, _, _| {}, |t, x| {
        traj.record(opts.record_path, t, x, None)
    })?;
    Ok(traj)
}

/// `int_0^T f(X(t)) dt` along a freshly simulated path, without storing it.
pub fn path_integral<R: Rng>(rates: &RateMatrix, initial: usize, horizon: f64, f: &[f64], rng: &mut R) -> Result<f64> {
    let mut acc = 0.0;
    run_ctmc(rates, initial, horizon, rng, |x, _, dt| acc += f[x] * dt, |_, _| {})?;
    Ok(acc)
}

/// Uncoupled product process: each component runs its own Glauber dynamics.
/// `nu` and `eta` both hold the plain occupation measure and all time is
/// credited to the identity assignment.
pub fn simulate_uncoupled(
    chain: &ProductChain,
    initial: &[usize],
    horizon: f64,
    seed: u64,
    opts: SimOptions,
) -> Result<SimOutput> {
    check_horizon(horizon)?;
    let start = chain.encode(initial)?;
    let rates = chain.uncoupled_generator()?;
    let mut rng = replica_rng(seed, opts.stream);
    let mut traj = Trajectory::start(seed, opts.stream, start, None, horizon);
    let mut acc = OccupationAccumulators::new(chain.size(), chain.k());
    let mut sched = Schedule::new(horizon, opts.checkpoints);
    let traj_ref = &mut traj;
    run_ctmc(
        &rates,
        start,
        horizon,
        &mut rng,
        |x, t0, dt| {
            sched.hold(&mut acc, t0, dt, |acc, piece| {
                acc.nu[x] += piece;
                acc.eta[x] += piece;
                acc.rho[0] += piece;
            })
        },
        |t, x| traj_ref.record(opts.record_path, t, x, None),
    )?;
    Ok(SimOutput {
        trajectory: traj,
        accumulators: acc,
        checkpoints: sched.snaps,
    })
}

/// Infinite-swapping limit process with its weighted empirical measure,
/// association vector and per-particle temperature fractions.
pub fn simulate_ins(
    chain: &ProductChain,
    initial: &[usize],
    horizon: f64,
    seed: u64,
    opts: SimOptions,
) -> Result<SimOutput> {
    if chain.k() < 2 {
        return Err(Error::TemperatureCount {
            required: 2,
            actual: chain.k(),
        });
    }
    let ins = chain.ins_generator()?;
    simulate_ins_with(chain, &ins.rates, initial, horizon, seed, opts)
}

/// As [`simulate_ins`] with a prebuilt infinite-swapping rate matrix, so
/// replicas can share one generator.
pub fn simulate_ins_with(
    chain: &ProductChain,
    ins_rates: &RateMatrix,
    initial: &[usize],
    horizon: f64,
    seed: u64,
    opts: SimOptions,
) -> Result<SimOutput> {
    check_horizon(horizon)?;
    let start = chain.encode(initial)?;
    let nperm = chain.num_permutations();
    let mut rng = replica_rng(seed, opts.stream);
    let mut traj = Trajectory::start(seed, opts.stream, start, None, horizon);
    let mut acc = OccupationAccumulators::new(chain.size(), chain.k());
    let mut sched = Schedule::new(horizon, opts.checkpoints);
    let traj_ref = &mut traj;
    run_ctmc(
        ins_rates,
        start,
        horizon,
        &mut rng,
        |x, t0, dt| {
            sched.hold(&mut acc, t0, dt, |acc, piece| {
                acc.nu[x] += piece;
                for s in 0..nperm {
                    let r = chain.rho_at(x, s);
                    acc.eta[chain.permuted(x, s)] += r * piece;
                    acc.rho[s] += r * piece;
                }
            })
        },
        |t, x| traj_ref.record(opts.record_path, t, x, None),
    )?;
    Ok(SimOutput {
        trajectory: traj,
        accumulators: acc,
        checkpoints: sched.snaps,
    })
}

/// Continuous-time parallel tempering in temperature-swapped form: the
/// particles keep their locations and a swap flips which temperature drives
/// which particle. Each step races the component clock against the swap
/// clock.
pub fn simulate_pt(
    chain: &ProductChain,
    swap_rate: f64,
    initial: &[usize],
    horizon: f64,
    seed: u64,
    opts: SimOptions,
) -> Result<SimOutput> {
    check_horizon(horizon)?;
    if chain.k() != 2 {
        return Err(Error::TemperatureCount {
            required: 2,
            actual: chain.k(),
        });
    }
    if !(swap_rate.is_finite() && swap_rate >= 0.0) {
        return Err(Error::param("swap_rate", format!("{swap_rate} (need a >= 0)")));
    }
    let start = chain.encode(initial)?;
    let n = chain.n();
    let comps = chain.components();
    let mut rng = replica_rng(seed, opts.stream);
    let mut traj = Trajectory::start(seed, opts.stream, start, Some(0), horizon);
    let mut acc = OccupationAccumulators::new(chain.size(), 2);
    let mut sched = Schedule::new(horizon, opts.checkpoints);

    let mut y = [start / n, start % n];
    // s = 0: particle j at temperature j; s = 1: temperatures exchanged
    let mut s = 0usize;
    let mut t = 0.0;
    loop {
        let temp_of = |j: usize| if s == 0 { j } else { 1 - j };
        let qj = [
            comps[temp_of(0)].rates.exit_rate(y[0]),
            comps[temp_of(1)].rates.exit_rate(y[1]),
        ];
        let q_move = qj[0] + qj[1];
        let idx = y[0] * n + y[1];
        // temperature-ordered state x = y^sigma
        let x = if s == 0 { idx } else { y[1] * n + y[0] };
        let q_swap = swap_rate * chain.swap_prob_at(x);
        if q_move <= 0.0 && q_swap <= 0.0 {
            return Err(Error::AbsorbingState(idx));
        }
        let s1 = if q_move > 0.0 { exp_sample(&mut rng, q_move) } else { f64::INFINITY };
        let s2 = if q_swap > 0.0 { exp_sample(&mut rng, q_swap) } else { f64::INFINITY };
        let dt = s1.min(s2);
        let stop = t + dt >= horizon;
        let hold = if stop { horizon - t } else { dt };
        sched.hold(&mut acc, t, hold, |acc, piece| {
            acc.nu[idx] += piece;
            acc.eta[x] += piece;
            acc.rho[s] += piece;
        });
        if stop {
            break;
        }
        t += dt;
        if s2 < s1 {
            s = 1 - s;
        } else {
            let j = pick(&mut rng, &qj, q_move);
            let rates = &comps[temp_of(j)].rates;
            let (cols, vals) = rates.row_slices(y[j]);
            y[j] = cols[pick(&mut rng, vals, qj[j])];
        }
        traj.record(opts.record_path, t, y[0] * n + y[1], Some(s));
    }
    Ok(SimOutput {
        trajectory: traj,
        accumulators: acc,
        checkpoints: sched.snaps,
    })
}

/// Swap dynamics with the particles frozen at `y`: the assignment process
/// alone, flipping at rate `a b(.)` of the current temperature-ordered state.
/// Returns the fraction of time spent in each assignment.
pub fn simulate_frozen_swaps(
    chain: &ProductChain,
    y: &[usize],
    swap_rate: f64,
    horizon: f64,
    seed: u64,
) -> Result<[f64; 2]> {
    check_horizon(horizon)?;
    let idx = chain.encode(y)?;
    if chain.k() != 2 {
        return Err(Error::TemperatureCount {
            required: 2,
            actual: chain.k(),
        });
    }
    let states = [idx, chain.permuted(idx, 1)];
    let rate = [
        swap_rate * chain.swap_prob_at(states[0]),
        swap_rate * chain.swap_prob_at(states[1]),
    ];
    let mut rng = replica_rng(seed, 0);
    let mut occ = [0.0; 2];
    let (mut t, mut s) = (0.0, 0usize);
    while t < horizon {
        if rate[s] <= 0.0 {
            occ[s] += horizon - t;
            break;
        }
        let dt = exp_sample(&mut rng, rate[s]).min(horizon - t);
        occ[s] += dt;
        t += dt;
        s = 1 - s;
    }
    Ok([occ[0] / horizon, occ[1] / horizon])
}

/// Fraction of time particle 1 spends at each temperature:
/// `beta_k = sum over sigma with sigma(1) = k of rho_sigma`.
pub fn beta_from_rho(rho: &[f64], k: usize) -> Vec<f64> {
    let perms = crate::perm::all_permutations(k);
    debug_assert_eq!(perms.len(), rho.len());
    let mut beta = vec![0.0; k];
    for (p, r) in perms.iter().zip(rho) {
        beta[p.image(0)] += r;
    }
    beta
}

/// Run `replicas` independent infinite-swapping replicas (streams
/// `0..replicas`) in parallel.
pub fn ins_replicas(
    chain: &ProductChain,
    initial: &[usize],
    horizon: f64,
    seed: u64,
    replicas: usize,
    checkpoints: usize,
) -> Result<Vec<SimOutput>> {
    let ins = chain.ins_generator()?;
    (0..replicas as u64)
        .into_par_iter()
        .map(|stream| {
            simulate_ins_with(
                chain,
                &ins.rates,
                initial,
                horizon,
                seed,
                SimOptions {
                    stream,
                    record_path: false,
                    checkpoints,
                },
            )
        })
        .collect()
}

/// Parallel-tempering analogue of [`ins_replicas`].
pub fn pt_replicas(
    chain: &ProductChain,
    swap_rate: f64,
    initial: &[usize],
    horizon: f64,
    seed: u64,
    replicas: usize,
    checkpoints: usize,
) -> Result<Vec<SimOutput>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(|stream| {
            simulate_pt(
                chain,
                swap_rate,
                initial,
                horizon,
                seed,
                SimOptions {
                    stream,
                    record_path: false,
                    checkpoints,
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::total_variation;
    use crate::model::{AdjacencyKind, Grid, Potential};
    use crate::perm::Permutation;
    use approx::assert_relative_eq;

    fn two_state_rates(l: f64, m: f64) -> RateMatrix {
        RateMatrix::from_dense(&[vec![0.0, l], vec![m, 0.0]]).unwrap()
    }

    fn chain(n: usize, alpha: f64, temps: &[f64]) -> ProductChain {
        let g = Grid::uniform(-1.5, 1.5, n, AdjacencyKind::NearestNeighbor).unwrap();
        let p = Potential::franz(&g, alpha).unwrap();
        ProductChain::new(&g, &p, temps).unwrap()
    }

    #[test]
    fn trajectory_shape_and_determinism() {
        let r = two_state_rates(1.0, 2.0);
        let a = simulate_ctmc(&r, 1, 50.0, 7).unwrap();
        let b = simulate_ctmc(&r, 1, 50.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.states[0], 1);
        assert!(a.times.windows(2).all(|w| w[0] < w[1]));
        assert!(*a.times.last().unwrap() < 50.0);
        assert_eq!(a.jumps as usize, a.states.len() - 1);
        let c = simulate_ctmc(&r, 1, 50.0, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn jump_rate_of_symmetric_two_state_chain() {
        let r = two_state_rates(1.0, 1.0);
        let t = 200.0;
        let counts: Vec<f64> = (0..100)
            .map(|s| simulate_ctmc(&r, 0, t, s).unwrap().jumps as f64 / t)
            .collect();
        let mean = counts.iter().sum::<f64>() / 100.0;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / 99.0;
        let se = (var / 100.0).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn occupation_matches_stationary_law() {
        let (l, m) = (0.5, 1.5);
        let r = two_state_rates(l, m);
        let occ = simulate_ctmc(&r, 0, 2e4, 3).unwrap().occupation(2);
        assert_relative_eq!(occ[0] + occ[1], 1.0, epsilon = 1e-12);
        assert!((occ[0] - m / (l + m)).abs() < 0.02);
    }

    #[test]
    fn absorbing_state_rejected() {
        let r = RateMatrix::from_dense(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(simulate_ctmc(&r, 1, 1.0, 0), Err(Error::AbsorbingState(1))));
        assert!(simulate_ctmc(&r, 0, 0.0, 0).is_err());
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_from_rho(&[0.7, 0.3], 2), vec![0.7, 0.3]);
        let b = beta_from_rho(&[1.0 / 6.0; 6], 3);
        for v in b {
            assert_relative_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn pt_without_swaps_never_flips() {
        let ch = chain(6, 1.0, &[0.1, 0.5]);
        let out = simulate_pt(&ch, 0.0, &[1, 4], 100.0, 1, SimOptions::default()).unwrap();
        assert_eq!(out.accumulators.rho_t(), vec![1.0, 0.0]);
        assert!(out.trajectory.labels.iter().all(|&l| l == 0));
        // nu and eta coincide when the assignment never changes
        assert_eq!(out.accumulators.nu, out.accumulators.eta);
    }

    #[test]
    fn frozen_swaps_follow_rho() {
        let ch = chain(6, 1.0, &[0.1, 0.5]);
        let y = [1, 3];
        let occ = simulate_frozen_swaps(&ch, &y, 5.0, 2e4, 11).unwrap();
        let expect = ch.rho(&y, &Permutation::identity(2)).unwrap();
        assert!((occ[0] - expect).abs() < 0.02, "{occ:?} vs {expect}");
    }

    #[test]
    fn ins_eta_is_image_of_nu() {
        let ch = chain(5, 0.9, &[0.1, 0.5]);
        let out = simulate_ins(&ch, &[0, 4], 50.0, 2, SimOptions::default()).unwrap();
        let acc = &out.accumulators;
        let nu = acc.nu_t();
        let eta = acc.eta_t();
        let nperm = ch.num_permutations();
        for x in 0..ch.size() {
            let m: f64 = ch.rho_identity(x) * (0..nperm).map(|s| nu[ch.permuted(x, s)]).sum::<f64>();
            assert!((m - eta[x]).abs() < 1e-12);
        }
        for v in [nu, eta, acc.rho_t(), acc.beta_t()] {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn checkpoints_are_geometric_and_normalized() {
        let ch = chain(5, 1.0, &[0.1, 0.5]);
        let opts = SimOptions {
            checkpoints: 4,
            ..SimOptions::default()
        };
        let out = simulate_ins(&ch, &[0, 4], 80.0, 5, opts).unwrap();
        let times: Vec<f64> = out.checkpoints.iter().map(|c| c.time).collect();
        assert_eq!(times, vec![10.0, 20.0, 40.0, 80.0]);
        for c in &out.checkpoints {
            assert!((c.eta.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        assert_eq!(out.checkpoints.last().unwrap().eta, out.accumulators.eta_t());
    }

    #[test]
    fn ins_long_run_converges() {
        let ch = chain(6, 1.0, &[0.1, 0.5]);
        let out = simulate_ins(
            &ch,
            &[0, 0],
            2e4,
            9,
            SimOptions {
                record_path: false,
                ..SimOptions::default()
            },
        )
        .unwrap();
        let beta = out.accumulators.beta_t();
        assert!((beta[0] - 0.5).abs() < 0.05, "{beta:?}");
        assert!(total_variation(&out.accumulators.eta_t(), ch.mu()) < 0.05);
    }

    #[test]
    fn merge_is_time_weighted() {
        let ch = chain(4, 1.0, &[0.1, 0.5]);
        let runs = ins_replicas(&ch, &[0, 3], 10.0, 1, 3, 0).unwrap();
        let mut total = runs[0].accumulators.clone();
        for r in &runs[1..] {
            total.merge(&r.accumulators);
        }
        assert_relative_eq!(total.time, 30.0, epsilon = 1e-9);
        assert_relative_eq!(total.eta_t().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_ne!(runs[0].accumulators, runs[1].accumulators);
    }
}
