//! One-dimensional grid state spaces, potentials, Gibbs measures and
//! Metropolis-type Glauber rates at a single temperature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{RateMatrix, RateMatrixBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencyKind {
    #[default]
    NearestNeighbor,
}

/// Finite state space: strictly increasing positions plus a symmetric 0/1
/// adjacency with a single communicating class.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    adjacency: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
}

impl Grid {
    /// `n` equispaced points on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize, kind: AdjacencyKind) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidGrid(format!("non-finite bounds [{lo}, {hi}]")));
        }
        if lo >= hi {
            return Err(Error::InvalidGrid(format!("lo = {lo} must be < hi = {hi}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need n >= 2 points, got {n}")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let points: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
            .collect();
        let mut adjacency = vec![false; n * n];
        match kind {
            AdjacencyKind::NearestNeighbor => {
                for i in 0..n - 1 {
                    adjacency[i * n + i + 1] = true;
                    adjacency[(i + 1) * n + i] = true;
                }
            }
        }
        Self::with_adjacency(points, adjacency)
    }

    /// General constructor; `adjacency` is row-major `N x N`.
    pub fn with_adjacency(points: Vec<f64>, adjacency: Vec<bool>) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need n >= 2 points, got {n}")));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid("non-finite point".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("points must be strictly increasing".into()));
        }
        if adjacency.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: adjacency.len(),
            });
        }
        for i in 0..n {
            if adjacency[i * n + i] {
                return Err(Error::InvalidGrid(format!("self-loop at state {i}")));
            }
            for j in 0..n {
                if adjacency[i * n + j] != adjacency[j * n + i] {
                    return Err(Error::InvalidGrid(format!("asymmetric adjacency at ({i}, {j})")));
                }
            }
        }
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| adjacency[i * n + j]).collect())
            .collect();
        // connectivity
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidGrid("adjacency graph is not connected".into()));
        }
        Ok(Self {
            points,
            adjacency,
            neighbors,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.len() + j]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, p) in self.points.iter().enumerate() {
            if (p - x).abs() < (self.points[best] - x).abs() {
                best = i;
            }
        }
        best
    }
}

/// Quartic double well with minima at `-1` and `alpha` and barrier height 1
/// at the origin.
pub fn franz_value(x: f64, alpha: f64) -> f64 {
    let x2 = x * x;
    (3.0 * x2 * x2 - 4.0 * (alpha - 1.0) * x2 * x - 6.0 * alpha * x2) / (2.0 * alpha + 1.0) + 1.0
}

/// Per-state energies, optionally tagged with the Franz parameter that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    values: Vec<f64>,
    franz_alpha: Option<f64>,
}

impl Potential {
    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("potential", "non-finite energy"));
        }
        Ok(Self {
            values,
            franz_alpha: None,
        })
    }

    pub fn franz(grid: &Grid, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || 2.0 * alpha + 1.0 <= 0.0 {
            return Err(Error::param("franz_alpha", format!("{alpha} (need alpha > -1/2)")));
        }
        Ok(Self {
            values: grid.points().iter().map(|&x| franz_value(x, alpha)).collect(),
            franz_alpha: Some(alpha),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn franz_alpha(&self) -> Option<f64> {
        self.franz_alpha
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::param("temperature", format!("{tau} (need tau > 0)")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsMeasure {
    pub temperature: f64,
    pub probs: Vec<f64>,
}

impl GibbsMeasure {
    /// `log mu(x)`, computed without forming `mu` first.
    pub fn log_probs(potential: &Potential, tau: f64) -> Vec<f64> {
        let vmin = potential.min();
        let shifted: Vec<f64> = potential.values().iter().map(|v| -(v - vmin) / tau).collect();
        let log_z = shifted.iter().map(|s| s.exp()).sum::<f64>().ln();
        shifted.into_iter().map(|s| s - log_z).collect()
    }
}

/// `mu(x) = exp(-V(x)/tau) / Z(tau)`, with `min V` subtracted before
/// exponentiation.
pub fn gibbs(potential: &Potential, grid: &Grid, tau: f64) -> Result<GibbsMeasure> {
    potential.check_grid(grid)?;
    check_tau(tau)?;
    let vmin = potential.min();
    let weights: Vec<f64> = potential
        .values()
        .iter()
        .map(|v| (-(v - vmin) / tau).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    Ok(GibbsMeasure {
        temperature: tau,
        probs: weights.into_iter().map(|w| w / z).collect(),
    })
}

/// Glauber dynamics of Metropolis type at one temperature.
#[derive(Debug, Clone)]
pub struct SingleTempChain {
    pub temperature: f64,
    pub rates: RateMatrix,
    pub stationary: GibbsMeasure,
    pub log_stationary: Vec<f64>,
}

impl SingleTempChain {
    pub fn exit_rates(&self) -> &[f64] {
        self.rates.exit_rates()
    }
}

/// `Gamma(x, y) = exp(-(V(y) - V(x))^+ / tau)` on adjacent pairs.
pub fn glauber_rates(potential: &Potential, grid: &Grid, tau: f64) -> Result<SingleTempChain> {
    potential.check_grid(grid)?;
    check_tau(tau)?;
    let v = potential.values();
    let mut b = RateMatrixBuilder::new(grid.len());
    for x in 0..grid.len() {
        b.push_row(
            grid.neighbors(x)
                .iter()
                .map(|&y| (y, (-(v[y] - v[x]).max(0.0) / tau).exp())),
        )?;
    }
    Ok(SingleTempChain {
        temperature: tau,
        rates: b.finish()?,
        stationary: gibbs(potential, grid, tau)?,
        log_stationary: GibbsMeasure::log_probs(potential, tau),
    })
}

/// Mass a measure over grid states places on points `>= 0`.
pub fn mass_right(probs: &[f64], grid: &Grid) -> Result<f64> {
    if probs.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: probs.len(),
        });
    }
    Ok(grid
        .points()
        .iter()
        .zip(probs)
        .filter(|(x, _)| **x >= 0.0)
        .map(|(_, p)| p)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_state() -> (Grid, Potential) {
        let g = Grid::uniform(0.0, 1.0, 2, AdjacencyKind::NearestNeighbor).unwrap();
        let p = Potential::tabulated(vec![0.0, 1.0]).unwrap();
        (g, p)
    }

    #[test]
    fn three_point_grid() {
        let g = Grid::uniform(-1.0, 1.0, 3, AdjacencyKind::NearestNeighbor).unwrap();
        assert_eq!(g.points(), &[-1.0, 0.0, 1.0]);
        assert!(g.adjacent(0, 1) && g.adjacent(1, 2));
        assert!(!g.adjacent(0, 2) && !g.adjacent(0, 0));
    }

    #[test]
    fn twelve_point_spacing() {
        let g = Grid::uniform(-1.5, 1.5, 12, AdjacencyKind::NearestNeighbor).unwrap();
        assert_eq!(g.len(), 12);
        for w in g.points().windows(2) {
            assert_relative_eq!(w[1] - w[0], 3.0 / 11.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn grid_errors() {
        assert!(Grid::uniform(0.0, 1.0, 1, AdjacencyKind::NearestNeighbor).is_err());
        assert!(Grid::uniform(1.0, 0.0, 4, AdjacencyKind::NearestNeighbor).is_err());
        assert!(Grid::uniform(f64::NAN, 1.0, 4, AdjacencyKind::NearestNeighbor).is_err());
        // disconnected: 3 points, only 0-1 linked
        let adj = vec![false, true, false, true, false, false, false, false, false];
        assert!(Grid::with_adjacency(vec![0.0, 1.0, 2.0], adj).is_err());
    }

    #[test]
    fn franz_values() {
        assert_eq!(franz_value(0.0, 1.0), 1.0);
        assert_relative_eq!(franz_value(-1.0, 1.0), 0.0, epsilon = 1e-15);
        for alpha in [0.85, 0.9, 1.0] {
            let expected = (3.0 + 4.0 * (alpha - 1.0) - 6.0 * alpha) / (2.0 * alpha + 1.0) + 1.0;
            assert_relative_eq!(franz_value(-1.0, alpha), expected, epsilon = 1e-15);
            assert_eq!(franz_value(0.0, alpha), 1.0);
        }
        let g = Grid::uniform(-1.5, 1.5, 12, AdjacencyKind::NearestNeighbor).unwrap();
        let v = Potential::franz(&g, 1.0).unwrap();
        for i in 0..12 {
            assert_relative_eq!(v.values()[i], v.values()[11 - i], epsilon = 1e-12);
        }
    }

    #[test]
    fn gibbs_uniform_and_two_state() {
        let g = Grid::uniform(0.0, 1.0, 5, AdjacencyKind::NearestNeighbor).unwrap();
        let flat = Potential::tabulated(vec![0.0; 5]).unwrap();
        for p in gibbs(&flat, &g, 0.3).unwrap().probs {
            assert_relative_eq!(p, 0.2, epsilon = 1e-15);
        }
        let (g, p) = two_state();
        let mu = gibbs(&p, &g, 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert_relative_eq!(mu.probs[0], 1.0 / (1.0 + e), epsilon = 1e-15);
        assert_relative_eq!(mu.probs[1], e / (1.0 + e), epsilon = 1e-15);
    }

    #[test]
    fn gibbs_shift_invariant() {
        let g = Grid::uniform(-1.5, 1.5, 12, AdjacencyKind::NearestNeighbor).unwrap();
        let v = Potential::franz(&g, 0.9).unwrap();
        let shifted = Potential::tabulated(v.values().iter().map(|x| x + 123.4).collect()).unwrap();
        let a = gibbs(&v, &g, 0.1).unwrap();
        let b = gibbs(&shifted, &g, 0.1).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
    }

    #[test]
    fn gibbs_rejects_bad_tau() {
        let (g, p) = two_state();
        assert!(gibbs(&p, &g, 0.0).is_err());
        assert!(gibbs(&p, &g, -1.0).is_err());
    }

    #[test]
    fn glauber_two_state_rates() {
        let (g, p) = two_state();
        let c = glauber_rates(&p, &g, 1.0).unwrap();
        assert_relative_eq!(c.rates.rate(0, 1), (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(c.rates.rate(1, 0), 1.0);
    }

    #[test]
    fn glauber_flat_moves_have_unit_rate() {
        let g = Grid::uniform(0.0, 1.0, 3, AdjacencyKind::NearestNeighbor).unwrap();
        let p = Potential::tabulated(vec![0.5, 0.5, 0.2]).unwrap();
        let c = glauber_rates(&p, &g, 0.7).unwrap();
        assert_eq!(c.rates.rate(0, 1), 1.0);
        assert_eq!(c.rates.rate(1, 0), 1.0);
        assert_eq!(c.rates.rate(1, 2), 1.0);
    }

    #[test]
    fn glauber_detailed_balance_franz() {
        let g = Grid::uniform(-1.5, 1.5, 12, AdjacencyKind::NearestNeighbor).unwrap();
        for alpha in [1.0, 0.97, 0.85] {
            let v = Potential::franz(&g, alpha).unwrap();
            for tau in [0.1, 0.5] {
                let c = glauber_rates(&v, &g, tau).unwrap();
                assert!(c.rates.detailed_balance_violation(&c.stationary.probs) < 1e-12);
                for row in c.rates.to_dense() {
                    assert!(row.iter().sum::<f64>().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mass_right_cases() {
        let g = Grid::uniform(-1.5, 1.5, 12, AdjacencyKind::NearestNeighbor).unwrap();
        assert_relative_eq!(mass_right(&[1.0 / 12.0; 12], &g).unwrap(), 0.5, epsilon = 1e-15);
        let mut point = vec![0.0; 12];
        point[0] = 1.0;
        assert_eq!(mass_right(&point, &g).unwrap(), 0.0);
    }
}
