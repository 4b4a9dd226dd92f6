//! Unitary cost models for sequential insertion, total-cost accumulation
//! over the cluster-size insertion sequence, the rescaled insertion measure,
//! and the exact insertion-size law.

use std::collections::BTreeMap;
use std::collections::HashMap;

use rand::Rng;

use crate::discrete::ParkingState;
use crate::partitions::ln_gamma;
use crate::{Error, Result};

/// Unitary cost of inserting into a cluster of size `s`.
///
/// Means and variances are exact: uniform-displacement models in closed
/// form, walk models through the tridiagonal mean/second-moment systems of
/// the exit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostModel {
    /// Displacement-style cost `1 + U`, `U` uniform on `{0, ..., s-1}`.
    StandardParking,
    /// `1 + min(U, s - U)`, `U` uniform on `{0, ..., s}`.
    ClosestPlace,
    /// Exit time of a right-biased (`p > 1/2`) walk from the cluster,
    /// uniform start.
    PWalk(f64),
    /// Exit time of the symmetric walk from the cluster, uniform start.
    SymmetricWalk,
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        if let CostModel::PWalk(p) = *self {
            if !(p > 0.5 && p < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "PWalk needs 1/2 < p < 1, got {p}"
                )));
            }
        }
        Ok(())
    }

    /// Draw one unitary cost for cluster size `s` (`s = 0`: cost 1).
    pub fn sample<R: Rng>(&self, s: usize, rng: &mut R) -> f64 {
        if s == 0 {
            return 1.0;
        }
        match *self {
            CostModel::StandardParking => 1.0 + rng.gen_range(0..s) as f64,
            CostModel::ClosestPlace => {
                let u = rng.gen_range(0..=s);
                1.0 + u.min(s - u) as f64
            }
            CostModel::PWalk(p) => walk_exit_time(s, p, rng),
            CostModel::SymmetricWalk => walk_exit_time(s, 0.5, rng),
        }
    }

    /// `Psi(s) = E[UCost^{(s)}]`.
    pub fn mean(&self, s: usize) -> f64 {
        if s == 0 {
            return 1.0;
        }
        match *self {
            CostModel::StandardParking => (s as f64 + 1.0) / 2.0,
            CostModel::ClosestPlace => 1.0 + (s as u64 * s as u64 / 4) as f64 / (s as f64 + 1.0),
            CostModel::PWalk(p) => walk_moments(s, p).0,
            CostModel::SymmetricWalk => walk_moments(s, 0.5).0,
        }
    }

    /// `V(s) = Var[UCost^{(s)}]`.
    pub fn variance(&self, s: usize) -> f64 {
        if s == 0 {
            return 0.0;
        }
        match *self {
            CostModel::StandardParking => ((s * s) as f64 - 1.0) / 12.0,
            CostModel::ClosestPlace => {
                // E[(min)^2] over the uniform start, plus the constant shift
                let k = s as f64;
                let mut sq = 0.0;
                for j in 0..=s {
                    let m = j.min(s - j) as f64;
                    sq += m * m;
                }
                sq /= k + 1.0;
                let mean_min = (s as u64 * s as u64 / 4) as f64 / (k + 1.0);
                sq - mean_min * mean_min
            }
            CostModel::PWalk(p) => walk_moments(s, p).1,
            CostModel::SymmetricWalk => walk_moments(s, 0.5).1,
        }
    }

    /// Total-mass normalization `alpha_n`.
    pub fn alpha(&self, n: usize) -> f64 {
        match *self {
            CostModel::SymmetricWalk => (n as f64) * (n as f64),
            _ => n as f64,
        }
    }

    /// Scaling limit `Psi_inf(t) = lim Psi(floor(nt)) / alpha_n`.
    pub fn psi_infinity(&self, t: f64) -> f64 {
        match *self {
            CostModel::StandardParking => t / 2.0,
            CostModel::ClosestPlace => t / 4.0,
            CostModel::PWalk(p) => t / (2.0 * (2.0 * p - 1.0)),
            CostModel::SymmetricWalk => t * t / 6.0,
        }
    }
}

/// Simulate the exit time of a `p`-walk from `{1..s}` (absorbing at 0 and
/// s+1), uniform start.
fn walk_exit_time<R: Rng>(s: usize, p: f64, rng: &mut R) -> f64 {
    let mut pos = rng.gen_range(1..=s) as i64;
    let n = s as i64 + 1;
    let mut t = 0f64;
    while pos > 0 && pos < n {
        pos += if rng.gen::<f64>() < p { 1 } else { -1 };
        t += 1.0;
    }
    t
}

thread_local! {
    static WALK_CACHE: std::cell::RefCell<HashMap<(usize, u64), (f64, f64)>> =
        std::cell::RefCell::new(HashMap::new());
}

/// `(mean, variance)` of the exit time from `{1..s}` with right probability
/// `p`, uniform start; cached per `(s, p)`.
fn walk_moments(s: usize, p: f64) -> (f64, f64) {
    let key = (s, p.to_bits());
    if let Some(hit) = WALK_CACHE.with(|c| c.borrow().get(&key).copied()) {
        return hit;
    }
    let n = s + 1; // absorbing at 0 and n
    let q = 1.0 - p;
    // h1[j] = 1 + p h1[j+1] + q h1[j-1]
    let h1 = solve_tridiag(n, p, q, |_| 1.0);
    // h2[j] = 1 + 2(p h1[j+1] + q h1[j-1]) + p h2[j+1] + q h2[j-1]
    let h2 = solve_tridiag(n, p, q, |j| 1.0 + 2.0 * (p * h1[j + 1] + q * h1[j - 1]));
    let mean: f64 = h1[1..=s].iter().sum::<f64>() / s as f64;
    let second: f64 = h2[1..=s].iter().sum::<f64>() / s as f64;
    let var = (second - mean * mean).max(0.0);
    WALK_CACHE.with(|c| c.borrow_mut().insert(key, (mean, var)));
    (mean, var)
}

/// Thomas solve of `-q x[j-1] + x[j] - p x[j+1] = rhs(j)` for `j in 1..n`,
/// `x[0] = x[n] = 0`.
fn solve_tridiag(n: usize, p: f64, q: f64, rhs: impl Fn(usize) -> f64) -> Vec<f64> {
    let m = n - 1; // unknowns x[1..=m]
    let mut c = vec![0.0; m + 1]; // modified upper coefficients
    let mut d = vec![0.0; m + 1]; // modified right-hand side
    c[1] = -p;
    d[1] = rhs(1);
    for j in 2..=m {
        let denom = 1.0 + q * c[j - 1];
        c[j] = -p / denom;
        d[j] = (rhs(j) + q * d[j - 1]) / denom;
    }
    let mut x = vec![0.0; n + 1];
    x[m] = d[m];
    for j in (1..m).rev() {
        x[j] = d[j] - c[j] * x[j + 1];
    }
    x
}

/// Total cost of a parking history: independent unitary draws against the
/// recorded cluster-size insertion sequence.
pub fn total_cost<R: Rng>(state: &ParkingState, model: CostModel, rng: &mut R) -> Result<f64> {
    model.validate()?;
    Ok(state
        .insertion_sizes
        .iter()
        .map(|&s| model.sample(s, rng))
        .sum())
}

/// Counting measure of the cluster-size insertion sequence up to time `t`.
#[derive(Debug, Clone)]
pub struct InsertionMeasure {
    pub counts: BTreeMap<usize, u64>,
    pub n: usize,
    pub t: usize,
}

impl InsertionMeasure {
    pub fn from_state(state: &ParkingState) -> Self {
        let mut counts = BTreeMap::new();
        for &s in &state.insertion_sizes {
            *counts.entry(s).or_insert(0) += 1;
        }
        InsertionMeasure {
            counts,
            n: state.n,
            t: state.insertion_sizes.len(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `<f, Theta_n> = n^{-1/2} sum_j f(s_j / n)`; use test functions
    /// supported away from zero (the measure piles up mass at 0).
    pub fn theta_functional(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.n as f64;
        let mut acc = 0.0;
        for (&s, &c) in &self.counts {
            let v = f(s as f64 / n);
            if v != 0.0 {
                acc += c as f64 * v;
            }
        }
        acc / n.sqrt()
    }
}

/// Exact insertion-size law: probability that the `m+1`-th car arrives in a
/// cluster of size `k` on an `n`-cycle after `m` uniform insertions.
pub fn insertion_size_pmf(n: u64, m: u64, k: u64) -> Result<f64> {
    if m >= n {
        return Err(Error::TooManyCars {
            cars: m as usize,
            slots: n as usize,
        });
    }
    if k == 0 {
        return Ok((n - m) as f64 / n as f64);
    }
    if k > m {
        return Ok(0.0);
    }
    // Bin(m, (k+1)/n) = k, in log space
    let p = (k + 1) as f64 / n as f64;
    let mut ln_binom =
        ln_gamma(m as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((m - k) as f64 + 1.0)
            + k as f64 * p.ln();
    if m > k {
        ln_binom += (m - k) as f64 * (1.0 - p).ln();
    }
    // ratio of arrangements of the remaining m-k cars on n-k-1 places
    // leaving one prescribed place free; vacuous (=1) when both are empty
    let ratio = if n - k - 1 == 0 {
        1.0
    } else {
        (n - 1 - m) as f64 / (n - k - 1) as f64
    };
    let factor = ratio * k as f64 / (k + 1) as f64;
    Ok(ln_binom.exp() * factor)
}

/// One scaled-cost trial: park `t_n(lambda)` cars on `n` slots, return
/// `(raw cost, cost / (sqrt(n) * alpha_n))`.
pub fn scaled_cost_trial<R: Rng>(
    n: usize,
    lambda: f64,
    model: CostModel,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let t = time_at(n, lambda);
    let choices: Vec<usize> = (0..t).map(|_| rng.gen_range(0..n)).collect();
    let state = crate::discrete::park(n, &choices)?;
    let cost = total_cost(&state, model, rng)?;
    let scaled = cost / ((n as f64).sqrt() * model.alpha(n));
    Ok((cost, scaled))
}

/// `t_n(lambda) = floor(n - lambda sqrt(n))`.
pub fn time_at(n: usize, lambda: f64) -> usize {
    let t = (n as f64 - lambda * (n as f64).sqrt()).floor();
    t.clamp(0.0, n as f64) as usize
}
