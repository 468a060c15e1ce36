//! Random instances and independent oracles shared by the integration tests.
#![allow(dead_code)]

use infswap::model::{AdjacencyKind, Grid, Potential};
use infswap::rates::RateMatrix;
use infswap::swapchain::ProductChain;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected reversible chain: path edges plus random chords, symmetric
/// conductances divided by a random stationary law.
pub fn random_reversible(n: usize, rng: &mut impl Rng) -> (RateMatrix, Vec<f64>) {
    let mut pi: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    let mut dense = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in x + 1..n {
            if y == x + 1 || rng.random_bool(0.2) {
                let c = rng.random_range(0.05..0.5);
                dense[x][y] = c / pi[x];
                dense[y][x] = c / pi[y];
            }
        }
    }
    (RateMatrix::from_dense(&dense).unwrap(), pi)
}

/// Product chain with a random tabulated potential and random temperatures.
pub fn random_product_chain(n: usize, k: usize, rng: &mut impl Rng) -> ProductChain {
    let grid = Grid::uniform(-1.0, 1.0, n, AdjacencyKind::NearestNeighbor).unwrap();
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.5)).collect();
    let potential = Potential::tabulated(values).unwrap();
    let mut temps: Vec<f64> = (0..k).map(|_| rng.random_range(0.3..1.5)).collect();
    temps.sort_by(f64::total_cmp);
    ProductChain::new(&grid, &potential, &temps).unwrap()
}

pub fn franz_chain(n: usize, alpha: f64, temps: &[f64]) -> ProductChain {
    let grid = Grid::uniform(-1.5, 1.5, n, AdjacencyKind::NearestNeighbor).unwrap();
    let potential = Potential::franz(&grid, alpha).unwrap();
    ProductChain::new(&grid, &potential, temps).unwrap()
}

/// Random probability vector with entries bounded away from zero.
pub fn random_measure(n: usize, floor: f64, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| floor + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Rate function written out from its definition
/// `sum q theta pi - sum_{x != y} sqrt(theta(x) theta(y)) r(x, y) pi(x)`.
pub fn rate_by_definition(rates: &RateMatrix, pi: &[f64], nu: &[f64]) -> f64 {
    let dense = rates.to_dense();
    let n = pi.len();
    let theta: Vec<f64> = (0..n).map(|x| nu[x] / pi[x]).collect();
    let mut total = 0.0;
    for x in 0..n {
        let q: f64 = (0..n).filter(|&y| y != x).map(|y| dense[x][y]).sum();
        total += q * theta[x] * pi[x];
        for y in 0..n {
            if y != x {
                total -= (theta[x] * theta[y]).sqrt() * dense[x][y] * pi[x];
            }
        }
    }
    total
}

/// Donsker-Varadhan variational form
/// `sup_{u > 0} sum_x nu(x) (-(L u)(x) / u(x))`, by a zooming grid search
/// over `log u` with `u(0) = 1` and ratios starting in `[1e-3, 1e3]`.
/// The objective is concave in `log u`, so zooming converges to the maximum.
pub fn donsker_varadhan(rates: &RateMatrix, nu: &[f64]) -> f64 {
    let dense = rates.to_dense();
    let n = nu.len();
    let objective = |v: &[f64]| -> f64 {
        let mut total = 0.0;
        for x in 0..n {
            for y in 0..n {
                if y != x && dense[x][y] > 0.0 {
                    total += nu[x] * dense[x][y] * (1.0 - (v[y] - v[x]).exp());
                }
            }
        }
        total
    };
    let dims = n - 1;
    let points = 21usize;
    let mut center = vec![0.0; dims];
    let mut half = (1e3f64).ln();
    let mut best = f64::NEG_INFINITY;
    let mut v = vec![0.0; n];
    while half > 1e-10 {
        let step = 2.0 * half / (points - 1) as f64;
        let mut best_point = center.clone();
        let total = points.pow(dims as u32);
        for idx in 0..total {
            let mut rem = idx;
            for d in 0..dims {
                v[d + 1] = center[d] - half + step * (rem % points) as f64;
                rem /= points;
            }
            let f = objective(&v);
            if f > best {
                best = f;
                best_point.copy_from_slice(&v[1..]);
            }
        }
        center = best_point;
        half = 2.0 * step;
    }
    best
}

/// Minimize `J(nu) + <h, nu>` over the simplex by descent on
/// `phi = sqrt(nu)` constrained to the unit sphere: conjugate tangent
/// gradients with exact line search on great circles, using the objective
/// written out from the definition of `J`.
pub fn convex_minimum(rates: &RateMatrix, pi: &[f64], h: &[f64]) -> f64 {
    let dense = rates.to_dense();
    let n = pi.len();
    // objective(phi) = phi^T A phi with A built from the definition of J
    let mut a = vec![vec![0.0; n]; n];
    for x in 0..n {
        let q: f64 = (0..n).filter(|&y| y != x).map(|y| dense[x][y]).sum();
        a[x][x] = q + h[x];
        for y in 0..n {
            if y != x {
                // -sqrt(theta_x theta_y) r(x,y) pi(x) with theta = phi^2 / pi
                a[x][y] -= 0.5 * dense[x][y] * (pi[x] / pi[y]).sqrt();
                a[y][x] -= 0.5 * dense[x][y] * (pi[x] / pi[y]).sqrt();
            }
        }
    }
    let apply = |v: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| a[i][j] * v[j]).sum()).collect() };
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(x, y)| x * y).sum() };
    let mut phi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    // Polak-Ribiere conjugate directions on the sphere, restarted whenever
    // the direction stops being a descent direction
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (gradient, direction)
    let mut value = dot(&phi, &apply(&phi));
    let mut best = value;
    let mut stalled = 0;
    for _ in 0..100_000 {
        let ap = apply(&phi);
        value = dot(&phi, &ap);
        if value < best {
            best = value;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 50 {
                break;
            }
        }
        let g: Vec<f64> = ap.iter().zip(&phi).map(|(a, p)| a - value * p).collect();
        let gg = dot(&g, &g);
        if gg.sqrt() < 1e-15 {
            break;
        }
        let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
        if let Some((g0, d0)) = &prev {
            let beta = (dot(&g, &g) - dot(&g, g0)) / dot(g0, g0);
            if beta > 0.0 {
                d.iter_mut().zip(d0).for_each(|(di, d0i)| *di += beta * d0i);
            }
        }
        let c = dot(&d, &phi);
        d.iter_mut().zip(&phi).for_each(|(di, p)| *di -= c * p);
        if dot(&d, &g) >= 0.0 {
            d = g.iter().map(|x| -x).collect();
        }
        let dn = dot(&d, &d).sqrt();
        d.iter_mut().for_each(|x| *x /= dn);
        // exact minimization over the great circle phi cos t + d sin t
        let ad = apply(&d);
        let (aa, bb, cc) = (value, dot(&phi, &ad), dot(&d, &ad));
        let f = |t: f64| aa * t.cos().powi(2) + 2.0 * bb * t.sin() * t.cos() + cc * t.sin().powi(2);
        let t0 = 0.5 * (2.0 * bb).atan2(aa - cc);
        let t = if f(t0) <= f(t0 + std::f64::consts::FRAC_PI_2) { t0 } else { t0 + std::f64::consts::FRAC_PI_2 };
        let (ct, st) = (t.cos(), t.sin());
        let new_phi: Vec<f64> = phi.iter().zip(&d).map(|(p, di)| ct * p + st * di).collect();
        // parallel transport of the direction along the geodesic
        let moved: Vec<f64> = phi.iter().zip(&d).map(|(p, di)| -st * p + ct * di).collect();
        phi = new_phi;
        let norm = dot(&phi, &phi).sqrt();
        phi.iter_mut().for_each(|x| *x /= norm);
        prev = Some((g, moved.iter().map(|x| x * dn).collect()));
    }
    best.min(value)
}
