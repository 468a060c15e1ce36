//! K-temperature product chains: uncoupled dynamics, continuous-time
//! parallel tempering, and the infinite-swapping limit.
//!
//! States of `S^K` are flat indices in row-major order over the component
//! indices (component 0 is the most significant digit). Swap weights
//! `rho(x^sigma)` are tabulated for every state and permutation at
//! construction, working in log space so the low-temperature Gibbs factors
//! never underflow.

use crate::error::{Error, Result};
use crate::measure::ProbMeasure;
use crate::model::{glauber_rates, Grid, Potential, SingleTempChain};
use crate::perm::{all_permutations, Permutation};
use crate::rates::{RateMatrix, RateMatrixBuilder};

/// Largest admitted product-space size `N^K`.
pub const MAX_PRODUCT_SIZE: usize = 1_000_000;
/// Largest admitted temperature count.
pub const MAX_TEMPERATURES: usize = 6;

/// Row-major codec between `K`-tuples over `0..N` and flat indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateCodec {
    n: usize,
    k: usize,
}

impl StateCodec {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k }
    }

    pub fn size(&self) -> usize {
        self.n.pow(self.k as u32)
    }

    pub fn encode(&self, x: &[usize]) -> usize {
        debug_assert_eq!(x.len(), self.k);
        x.iter().fold(0, |acc, &c| acc * self.n + c)
    }

    pub fn decode_into(&self, mut idx: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = idx % self.n;
            idx /= self.n;
        }
    }

    pub fn decode(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.k];
        self.decode_into(idx, &mut out);
        out
    }
}

/// Product of `K` single-temperature Glauber chains sharing one grid and
/// potential, with everything needed to build swap generators.
#[derive(Debug, Clone)]
pub struct ProductChain {
    grid: Grid,
    potential: Potential,
    components: Vec<SingleTempChain>,
    codec: StateCodec,
    perms: Vec<Permutation>,
    /// `perm_index[x * K! + s]` is the flat index of `x^{sigma_s}`.
    perm_index: Vec<usize>,
    /// `rho_table[x * K! + s] = rho(x^{sigma_s})`.
    rho_table: Vec<f64>,
    mu: Vec<f64>,
    mu_bar: Vec<f64>,
}

impl ProductChain {
    /// Glauber components at temperatures `temps` (index 0 is `tau_1`).
    pub fn new(grid: &Grid, potential: &Potential, temps: &[f64]) -> Result<Self> {
        let k = temps.len();
        if k == 0 || k > MAX_TEMPERATURES {
            return Err(Error::param(
                "temperatures",
                format!("need 1..={MAX_TEMPERATURES} temperatures, got {k}"),
            ));
        }
        let n = grid.len();
        let size = (n as u128).pow(k as u32);
        if size > MAX_PRODUCT_SIZE as u128 {
            return Err(Error::ProductTooLarge {
                size,
                limit: MAX_PRODUCT_SIZE,
            });
        }
        let components = temps
            .iter()
            .map(|&t| glauber_rates(potential, grid, t))
            .collect::<Result<Vec<_>>>()?;
        let codec = StateCodec::new(n, k);
        let perms = all_permutations(k);
        let nperm = perms.len();
        let size = codec.size();

        let mut perm_index = vec![0usize; size * nperm];
        let mut rho_table = vec![0.0; size * nperm];
        let mut mu = vec![0.0; size];
        let mut x = vec![0usize; k];
        let mut xs = vec![0usize; k];
        let mut logs = vec![0.0; nperm];
        let log_mu = |x: &[usize]| -> f64 {
            x.iter()
                .enumerate()
                .map(|(t, &xi)| components[t].log_stationary[xi])
                .sum()
        };
        for idx in 0..size {
            codec.decode_into(idx, &mut x);
            mu[idx] = log_mu(&x).exp();
            for (s, p) in perms.iter().enumerate() {
                p.apply_into(&x, &mut xs);
                perm_index[idx * nperm + s] = codec.encode(&xs);
                logs[s] = log_mu(&xs);
            }
            let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = logs.iter().map(|l| (l - m).exp()).sum();
            for s in 0..nperm {
                rho_table[idx * nperm + s] = (logs[s] - m).exp() / z;
            }
        }
        let mu_bar = (0..size)
            .map(|idx| {
                (0..nperm).map(|s| mu[perm_index[idx * nperm + s]]).sum::<f64>() / nperm as f64
            })
            .collect();

        Ok(Self {
            grid: grid.clone(),
            potential: potential.clone(),
            components,
            codec,
            perms,
            perm_index,
            rho_table,
            mu,
            mu_bar,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn temperatures(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.temperature).collect()
    }

    pub fn components(&self) -> &[SingleTempChain] {
        &self.components
    }

    /// Number of temperatures `K`.
    pub fn k(&self) -> usize {
        self.codec.k
    }

    /// Grid size `N`.
    pub fn n(&self) -> usize {
        self.codec.n
    }

    pub fn size(&self) -> usize {
        self.mu.len()
    }

    pub fn codec(&self) -> StateCodec {
        self.codec
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn num_permutations(&self) -> usize {
        self.perms.len()
    }

    pub fn encode(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                got: x.len(),
            });
        }
        if let Some(&c) = x.iter().find(|&&c| c >= self.n()) {
            return Err(Error::param("state", format!("component {c} outside 0..{}", self.n())));
        }
        Ok(self.codec.encode(x))
    }

    pub fn decode(&self, idx: usize) -> Vec<usize> {
        self.codec.decode(idx)
    }

    /// Flat index of `x^{sigma_s}` for the `s`-th permutation.
    pub fn permuted(&self, idx: usize, s: usize) -> usize {
        self.perm_index[idx * self.perms.len() + s]
    }

    /// `rho(x^{sigma_s})` for flat state `idx`.
    pub fn rho_at(&self, idx: usize, s: usize) -> f64 {
        self.rho_table[idx * self.perms.len() + s]
    }

    /// `rho(x)`, the weight of the identity assignment.
    pub fn rho_identity(&self, idx: usize) -> f64 {
        self.rho_at(idx, 0)
    }

    /// Swap weight `rho(x^sigma) = mu(x^sigma) / sum_sigma' mu(x^sigma')`.
    pub fn rho(&self, x: &[usize], sigma: &Permutation) -> Result<f64> {
        let idx = self.encode(x)?;
        let s = self.perm_position(sigma)?;
        Ok(self.rho_at(idx, s))
    }

    pub fn perm_position(&self, sigma: &Permutation) -> Result<usize> {
        self.perms
            .iter()
            .position(|p| p == sigma)
            .ok_or_else(|| Error::param("permutation", format!("{sigma} not in S_{}", self.k())))
    }

    /// Product Gibbs measure `mu = mu_1 x ... x mu_K`.
    pub fn product_measure(&self) -> ProbMeasure {
        ProbMeasure::from_vec_unchecked(self.mu.clone())
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `(1/K!) sum_sigma mu(x^sigma)`, the stationary law of the INS process.
    pub fn symmetrized_measure(&self) -> ProbMeasure {
        ProbMeasure::from_vec_unchecked(self.mu_bar.clone())
    }

    pub fn mu_bar(&self) -> &[f64] {
        &self.mu_bar
    }

    /// Grid positions of the components of flat state `idx`.
    pub fn positions(&self, idx: usize) -> Vec<f64> {
        self.decode(idx).into_iter().map(|c| self.grid.points()[c]).collect()
    }

    fn require_k(&self, k: usize) -> Result<()> {
        if self.k() != k {
            return Err(Error::TemperatureCount {
                required: k,
                actual: self.k(),
            });
        }
        Ok(())
    }

    /// Metropolis swap acceptance `b(x1, x2) = 1 ∧ mu(x2, x1) / mu(x1, x2)`.
    pub fn swap_prob_b(&self, x: &[usize]) -> Result<f64> {
        self.require_k(2)?;
        let idx = self.encode(x)?;
        Ok(self.swap_prob_at(idx))
    }

    pub(crate) fn swap_prob_at(&self, idx: usize) -> f64 {
        // rho(x^R) / rho(x) = mu(x^R) / mu(x)
        let r = self.rho_at(idx, 1) / self.rho_at(idx, 0);
        r.min(1.0)
    }

    /// Uncoupled generator: one component moves at a time with its own rates.
    pub fn uncoupled_generator(&self) -> Result<RateMatrix> {
        let k = self.k();
        let mut b = RateMatrixBuilder::new(self.size());
        let mut x = vec![0usize; k];
        let mut row = Vec::new();
        for idx in 0..self.size() {
            self.codec.decode_into(idx, &mut x);
            row.clear();
            for j in 0..k {
                let stride = self.n().pow((k - 1 - j) as u32);
                for (y, r) in self.components[j].rates.row(x[j]) {
                    row.push((idx + y * stride - x[j] * stride, r));
                }
            }
            b.push_row(row.iter().copied())?;
        }
        b.finish()
    }

    /// Parallel tempering with swap attempts at rate `a`: adds a jump
    /// `(x1, x2) -> (x2, x1)` at rate `a b(x1, x2)`.
    pub fn pt_generator(&self, a: f64) -> Result<RateMatrix> {
        self.require_k(2)?;
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::param("swap_rate", format!("{a} (need a >= 0)")));
        }
        let base = self.uncoupled_generator()?;
        let mut b = RateMatrixBuilder::new(self.size());
        for idx in 0..self.size() {
            let swapped = self.permuted(idx, 1);
            let mut row: Vec<(usize, f64)> = base.row(idx).collect();
            if swapped != idx && a > 0.0 {
                row.push((swapped, a * self.swap_prob_at(idx)));
            }
            b.push_row(row)?;
        }
        b.finish()
    }

    /// Infinite-swapping rate matrix: a move of particle `j` from `x_j` to `y`
    /// happens at rate `sum_sigma rho(x^sigma) Gamma^{sigma(j)}(x_j, y)`.
    ///
    /// For `K = 1` this reduces to the single component's rates.
    pub fn ins_generator(&self) -> Result<InsGenerator> {
        let k = self.k();
        let nperm = self.perms.len();
        let mut b = RateMatrixBuilder::new(self.size());
        let mut x = vec![0usize; k];
        // weight[j * k + t]: probability particle j runs at temperature t
        let mut weight = vec![0.0; k * k];
        let mut row: Vec<(usize, f64)> = Vec::new();
        for idx in 0..self.size() {
            self.codec.decode_into(idx, &mut x);
            weight.iter_mut().for_each(|w| *w = 0.0);
            for (s, p) in self.perms.iter().enumerate() {
                let r = self.rho_table[idx * nperm + s];
                for j in 0..k {
                    weight[j * k + p.image(j)] += r;
                }
            }
            row.clear();
            for j in 0..k {
                let stride = self.n().pow((k - 1 - j) as u32);
                let xj = x[j];
                for &y in self.grid.neighbors(xj) {
                    let rate: f64 = (0..k)
                        .map(|t| weight[j * k + t] * self.components[t].rates.rate(xj, y))
                        .sum();
                    row.push((idx + y * stride - xj * stride, rate));
                }
            }
            b.push_row(row.iter().copied())?;
        }
        Ok(InsGenerator {
            rates: b.finish()?,
        })
    }

    /// `U(y1, y2) = -log(e^{-V(y1)/tau1 - V(y2)/tau2} + e^{-V(y2)/tau1 - V(y1)/tau2})`.
    pub fn implied_potential(&self, x: &[usize]) -> Result<f64> {
        self.require_k(2)?;
        self.encode(x)?;
        let v = self.potential.values();
        let t = self.temperatures();
        let a = -v[x[0]] / t[0] - v[x[1]] / t[1];
        let b = -v[x[1]] / t[0] - v[x[0]] / t[1];
        let m = a.max(b);
        Ok(-(m + ((a - m).exp() + (b - m).exp()).ln()))
    }
}

/// Rate matrix of the infinite-swapping process.
#[derive(Debug, Clone)]
pub struct InsGenerator {
    pub rates: RateMatrix,
}

impl InsGenerator {
    pub fn exit_rates(&self) -> &[f64] {
        self.rates.exit_rates()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AdjacencyKind;
    use approx::assert_relative_eq;

    fn two_state(temps: &[f64]) -> ProductChain {
        let g = Grid::uniform(0.0, 1.0, 2, AdjacencyKind::NearestNeighbor).unwrap();
        let p = Potential::tabulated(vec![0.0, 1.0]).unwrap();
        ProductChain::new(&g, &p, temps).unwrap()
    }

    fn franz(n: usize, alpha: f64, temps: &[f64]) -> ProductChain {
        let g = Grid::uniform(-1.5, 1.5, n, AdjacencyKind::NearestNeighbor).unwrap();
        let p = Potential::franz(&g, alpha).unwrap();
        ProductChain::new(&g, &p, temps).unwrap()
    }

    #[test]
    fn codec_roundtrip() {
        let c = StateCodec::new(5, 3);
        for idx in 0..c.size() {
            assert_eq!(c.encode(&c.decode(idx)), idx);
        }
        assert_eq!(c.encode(&[1, 2, 3]), 25 + 10 + 3);
    }

    #[test]
    fn rho_diagonal_and_normalization() {
        let ch = franz(6, 0.9, &[0.1, 0.5]);
        let id = Permutation::identity(2);
        assert_eq!(ch.rho(&[3, 3], &id).unwrap(), 0.5);
        for idx in 0..ch.size() {
            let s: f64 = (0..2).map(|s| ch.rho_at(idx, s)).sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rho_closed_form_two_temperatures() {
        // V(x1) - V(x2) = 1 with tau = (0.1, 0.5) gives 1/(1 + e^8)
        let ch = two_state(&[0.1, 0.5]);
        let r = ch.rho(&[1, 0], &Permutation::identity(2)).unwrap();
        assert_relative_eq!(r, 1.0 / (1.0 + 8f64.exp()), max_relative = 1e-12);
    }

    #[test]
    fn swap_prob_cases() {
        let ch = two_state(&[0.1, 0.5]);
        assert_eq!(ch.swap_prob_b(&[1, 1]).unwrap(), 1.0);
        // V(x1) - V(x2) = 1: mu(x2,x1)/mu(x1,x2) = e^{8} so b = 1
        assert_eq!(ch.swap_prob_b(&[1, 0]).unwrap(), 1.0);
        assert_relative_eq!(ch.swap_prob_b(&[0, 1]).unwrap(), (-8f64).exp(), max_relative = 1e-12);
        let three = two_state(&[0.1, 0.3, 0.5]);
        assert!(three.swap_prob_b(&[0, 1, 0]).is_err());
    }

    #[test]
    fn uncoupled_exit_rates_add() {
        let ch = two_state(&[0.1, 0.5]);
        let l0 = ch.uncoupled_generator().unwrap();
        assert_eq!(l0.len(), 4);
        for idx in 0..4 {
            let x = ch.decode(idx);
            let q = ch.components()[0].exit_rates()[x[0]] + ch.components()[1].exit_rates()[x[1]];
            assert_relative_eq!(l0.exit_rate(idx), q, epsilon = 1e-15);
        }
        let res = l0.left_apply_generator(ch.mu());
        assert!(res.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn pt_zero_rate_is_uncoupled() {
        let ch = franz(5, 0.9, &[0.1, 0.5]);
        assert_eq!(ch.pt_generator(0.0).unwrap(), ch.uncoupled_generator().unwrap());
        assert!(ch.pt_generator(-1.0).is_err());
    }

    #[test]
    fn pt_swap_rate_and_stationarity() {
        let ch = two_state(&[0.1, 0.5]);
        let la = ch.pt_generator(10.0).unwrap();
        let from = ch.encode(&[0, 1]).unwrap();
        let to = ch.encode(&[1, 0]).unwrap();
        assert_relative_eq!(la.rate(from, to), 10.0 * ch.swap_prob_b(&[0, 1]).unwrap());
        assert_relative_eq!(la.rate(from, to), 10.0 * (-8f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(la.rate(to, from), 10.0);
        let big = franz(6, 0.85, &[0.1, 0.5]);
        for a in [0.5, 10.0, 1e3] {
            let la = big.pt_generator(a).unwrap();
            assert!(la.detailed_balance_violation(big.mu()) < 1e-12);
            let res = la.left_apply_generator(big.mu());
            assert!(res.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn ins_diagonal_row_is_average() {
        let ch = franz(5, 0.9, &[0.1, 0.5]);
        let ins = ch.ins_generator().unwrap();
        let idx = ch.encode(&[2, 2]).unwrap();
        let to = ch.encode(&[3, 2]).unwrap();
        let avg = 0.5 * (ch.components()[0].rates.rate(2, 3) + ch.components()[1].rates.rate(2, 3));
        assert_relative_eq!(ins.rates.rate(idx, to), avg, epsilon = 1e-15);
        let to2 = ch.encode(&[2, 1]).unwrap();
        let avg2 = 0.5 * (ch.components()[0].rates.rate(2, 1) + ch.components()[1].rates.rate(2, 1));
        assert_relative_eq!(ins.rates.rate(idx, to2), avg2, epsilon = 1e-15);
    }

    #[test]
    fn ins_matches_two_temperature_formula() {
        let ch = franz(5, 0.95, &[0.1, 0.5]);
        let ins = ch.ins_generator().unwrap();
        let id = Permutation::identity(2);
        let (g1, g2) = (&ch.components()[0].rates, &ch.components()[1].rates);
        let (x1, x2) = (1, 3);
        let r12 = ch.rho(&[x1, x2], &id).unwrap();
        let r21 = ch.rho(&[x2, x1], &id).unwrap();
        let from = ch.encode(&[x1, x2]).unwrap();
        let first = r12 * g1.rate(x1, 2) + r21 * g2.rate(x1, 2);
        assert_relative_eq!(ins.rates.rate(from, ch.encode(&[2, x2]).unwrap()), first, max_relative = 1e-14);
        let second = r12 * g2.rate(x2, 4) + r21 * g1.rate(x2, 4);
        assert_relative_eq!(ins.rates.rate(from, ch.encode(&[x1, 4]).unwrap()), second, max_relative = 1e-14);
        // no two-component moves
        assert_eq!(ins.rates.rate(from, ch.encode(&[2, 4]).unwrap()), 0.0);
    }

    #[test]
    fn ins_reversible_and_symmetric_k3() {
        let ch = franz(5, 0.9, &[0.1, 0.3, 0.5]);
        let ins = ch.ins_generator().unwrap();
        assert!(ins.rates.detailed_balance_violation(ch.mu_bar()) < 1e-12);
        for idx in 0..ch.size() {
            for s in 0..ch.num_permutations() {
                let ps = ch.permuted(idx, s);
                assert_relative_eq!(ins.exit_rates()[idx], ins.exit_rates()[ps], max_relative = 1e-12);
                for (to, r) in ins.rates.row(idx) {
                    assert_relative_eq!(ins.rates.rate(ps, ch.permuted(to, s)), r, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetrized_measure_properties() {
        let ch = franz(6, 0.9, &[0.1, 0.5]);
        let mb = ch.symmetrized_measure();
        assert_relative_eq!(mb.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let a = ch.encode(&[0, 4]).unwrap();
        let b = ch.encode(&[4, 0]).unwrap();
        assert_eq!(mb.probs()[a], mb.probs()[b]);
        // equal temperatures: mu already symmetric
        let eq = franz(6, 0.9, &[0.3, 0.3]);
        for (x, y) in eq.mu().iter().zip(eq.mu_bar()) {
            assert_relative_eq!(x, y, max_relative = 1e-14);
        }
    }

    #[test]
    fn implied_potential_cases() {
        let g = Grid::uniform(-1.5, 1.5, 12, AdjacencyKind::NearestNeighbor).unwrap();
        let flat = ProductChain::new(&g, &Potential::tabulated(vec![0.0; 12]).unwrap(), &[0.1, 0.5]).unwrap();
        assert_relative_eq!(flat.implied_potential(&[3, 7]).unwrap(), -(2f64.ln()), epsilon = 1e-15);
        let ch = franz(12, 1.0, &[0.1, 0.5]);
        assert_eq!(ch.implied_potential(&[2, 9]).unwrap(), ch.implied_potential(&[9, 2]).unwrap());
        let (l, r) = (g.nearest(-1.0), g.nearest(1.0));
        let v = ch.potential().values();
        let direct = -((-v[l] / 0.1 - v[r] / 0.5).exp() + (-v[r] / 0.1 - v[l] / 0.5).exp()).ln();
        assert_relative_eq!(ch.implied_potential(&[l, r]).unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn size_limit_enforced() {
        let g = Grid::uniform(0.0, 1.0, 1001, AdjacencyKind::NearestNeighbor).unwrap();
        let p = Potential::tabulated(vec![0.0; 1001]).unwrap();
        assert!(matches!(
            ProductChain::new(&g, &p, &[0.1, 0.5]),
            Err(Error::ProductTooLarge { .. })
        ));
    }
}
