//! Empirical-measure rate functions for reversible jump processes and the
//! maps relating the symmetrized and the weighted empirical measures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::ProbMeasure;
use crate::perm::factorial;
use crate::rates::RateMatrix;
use crate::swapchain::ProductChain;

/// Default relative tolerance for the weighted-symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Rate of the empirical measure `nu` for a chain with rates `rates`
/// reversible with respect to `stationary`:
/// `J(nu) = (1/2) sum_{x,y} mu(x) r(x,y) (sqrt(theta(x)) - sqrt(theta(y)))^2`
/// with `theta = nu / mu`.
///
/// The Dirichlet-form expression is exactly zero at `nu = mu` and avoids the
/// cancellation of [`rate_j_direct`].
pub fn rate_j(rates: &RateMatrix, stationary: &[f64], nu: &[f64]) -> f64 {
    let root: Vec<f64> = nu
        .iter()
        .zip(stationary)
        .map(|(n, m)| (n / m).sqrt())
        .collect();
    let mut total = 0.0;
    for x in 0..rates.len() {
        let (cols, vals) = rates.row_slices(x);
        let inner: f64 = cols
            .iter()
            .zip(vals)
            .map(|(&y, &r)| r * (root[x] - root[y]).powi(2))
            .sum();
        total += stationary[x] * inner;
    }
    0.5 * total
}

/// `J(nu) = sum q theta mu - sum sqrt(theta(x) theta(y)) r(x,y) mu(x)`,
/// the same quantity as [`rate_j`] written as a difference.
pub fn rate_j_direct(rates: &RateMatrix, stationary: &[f64], nu: &[f64]) -> f64 {
    let theta: Vec<f64> = nu.iter().zip(stationary).map(|(n, m)| n / m).collect();
    let mut first = 0.0;
    let mut cross = 0.0;
    for x in 0..rates.len() {
        first += rates.exit_rate(x) * theta[x] * stationary[x];
        for (y, r) in rates.row(x) {
            cross += (theta[x] * theta[y]).sqrt() * r * stationary[x];
        }
    }
    first - cross
}

/// `(M nu)(x) = rho(x) sum_sigma nu(x^sigma)`.
pub fn map_m(chain: &ProductChain, nu: &[f64]) -> Result<ProbMeasure> {
    check_len(chain, nu.len())?;
    let nperm = chain.num_permutations();
    let out = (0..chain.size())
        .map(|x| chain.rho_identity(x) * (0..nperm).map(|s| nu[chain.permuted(x, s)]).sum::<f64>())
        .collect();
    Ok(ProbMeasure::from_vec_unchecked(out))
}

fn check_len(chain: &ProductChain, len: usize) -> Result<()> {
    if len != chain.size() {
        return Err(Error::DimensionMismatch {
            expected: chain.size(),
            got: len,
        });
    }
    Ok(())
}

/// Largest relative spread of `gamma / mu` over permutation orbits; zero
/// exactly when `gamma` is in the range of [`map_m`].
pub fn symmetry_discrepancy(chain: &ProductChain, gamma: &[f64]) -> Result<f64> {
    check_len(chain, gamma.len())?;
    let mu = chain.mu();
    let mut worst = 0.0_f64;
    for x in 0..chain.size() {
        let base = gamma[x] / mu[x];
        for s in 1..chain.num_permutations() {
            let y = chain.permuted(x, s);
            let other = gamma[y] / mu[y];
            let scale = base.abs().max(other.abs());
            if scale > 0.0 {
                worst = worst.max((base - other).abs() / scale);
            }
        }
    }
    Ok(worst)
}

/// Symmetric preimage `nu_sym(x) = gamma(x) / (K! rho(x))`, the minimizer of
/// the rate over `{nu : M nu = gamma}`. Fails with [`Error::Infeasible`] when
/// `gamma / mu` is not permutation invariant within `tol`.
pub fn nu_sym(chain: &ProductChain, gamma: &[f64], tol: f64) -> Result<ProbMeasure> {
    let d = symmetry_discrepancy(chain, gamma)?;
    if d > tol {
        return Err(Error::Infeasible { discrepancy: d });
    }
    let kf = factorial(chain.k()) as f64;
    let out = (0..chain.size())
        .map(|x| gamma[x] / (kf * chain.rho_identity(x)))
        .collect();
    Ok(ProbMeasure::from_vec_unchecked(out))
}

/// Rate of the weighted empirical measure evaluated with the uncoupled rates
/// and the product Gibbs measure; `+inf` outside the weighted-symmetric set.
pub fn rate_i_unsym(chain: &ProductChain, gamma: &[f64], tol: f64) -> Result<f64> {
    if symmetry_discrepancy(chain, gamma)? > tol {
        return Ok(f64::INFINITY);
    }
    let uncoupled = chain.uncoupled_generator()?;
    Ok(rate_j(&uncoupled, chain.mu(), gamma))
}

/// Law over temperature assignments, indexed like
/// [`ProductChain::permutations`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociationLaw {
    weights: Vec<f64>,
}

impl AssociationLaw {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if !(1..=12).any(|k| factorial(k) == n) {
            return Err(Error::param("association", format!("length {n} is not K!")));
        }
        let p = ProbMeasure::new(weights)?;
        Ok(Self { weights: p.into_vec() })
    }

    pub fn uniform(k: usize) -> Self {
        let n = factorial(k);
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Two-temperature law `(w, 1 - w)`.
    pub fn pair(w: f64) -> Result<Self> {
        Self::new(vec![w, 1.0 - w])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `w_sigma = sum_x rho(x^sigma) nu(x)`.
pub fn association_of(chain: &ProductChain, nu: &[f64]) -> Result<AssociationLaw> {
    check_len(chain, nu.len())?;
    let nperm = chain.num_permutations();
    let mut w = vec![0.0; nperm];
    for (x, &p) in nu.iter().enumerate() {
        for (s, ws) in w.iter_mut().enumerate() {
            *ws += chain.rho_at(x, s) * p;
        }
    }
    Ok(AssociationLaw { weights: w })
}

/// `nu^sigma(x) = nu(x^sigma)`.
pub fn permute_measure(chain: &ProductChain, nu: &[f64], s: usize) -> Vec<f64> {
    (0..chain.size()).map(|x| nu[chain.permuted(x, s)]).collect()
}
