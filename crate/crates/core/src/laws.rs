//! Closed-form and enumerative occupancy laws: binomial block counts,
//! Dirichlet / discrete-Dirichlet spacings, piling propensities, the
//! translation-set measure, the joint occupied-block law via partition sums,
//! and the block-count transition matrices in both the continuous and grid
//! settings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::circle::{dist_pos, CirclePoint};
use crate::partitions::{
    binomial_big, binomial_f64, for_each_partition, surjections, MAX_PARTITION_K,
};
pub use crate::partitions::{count_compositions, for_each_composition};
use crate::{Error, Result};

/// `P(N_k = 1+j) = C(k-1, j) (1-W)^j W^{k-1-j}`, indexed by `j = N-1`.
pub fn pmf_n_continuous(k: u32, total_mass: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&total_mass) {
        return Err(Error::MassOverflow(total_mass));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let w = total_mass;
    let r = 1.0 - w;
    let out = (0..k)
        .map(|j| {
            binomial_f64((k - 1) as u64, j as u64) * r.powi(j as i32) * w.powi((k - 1 - j) as i32)
        })
        .collect();
    Ok(out)
}

/// Piling propensity `Q = W^{k-1}`: the probability that all `k` masses form
/// a single occupied component.
pub fn piling_q(k: u32, total_mass: f64) -> f64 {
    total_mass.powi(k as i32 - 1)
}

/// Discrete piling propensity `(W + 1/n)^{k-1}`.
pub fn piling_q_discrete(k: u32, total_mass: f64, n: u64) -> f64 {
    (total_mass + 1.0 / n as f64).powi(k as i32 - 1)
}

/// Exact rational version of the discrete piling propensity, with
/// `W = mass_units / n`.
pub fn piling_q_discrete_exact(k: u32, mass_units: u64, n: u64) -> BigRational {
    let base = BigRational::new(BigInt::from(mass_units + 1), BigInt::from(n));
    num_traits::pow::pow(base, (k - 1) as usize)
}

/// `R * Dirichlet(b; 1, ..., 1)` via spacings of `b-1` uniforms on `[0, R]`.
pub fn sample_dirichlet_free<R: Rng>(b: usize, total: f64, rng: &mut R) -> Result<Vec<f64>> {
    if b == 0 || total <= 0.0 {
        return Err(Error::InvalidParameter("need b >= 1 and R > 0".into()));
    }
    let mut cuts: Vec<f64> = (0..b - 1).map(|_| rng.gen::<f64>() * total).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::with_capacity(b);
    let mut prev = 0.0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(total - prev);
    Ok(out)
}

/// Uniform composition of `r` into `b` positive parts (`DDirichlet(r, b)`).
pub fn sample_ddirichlet<R: Rng>(r: u64, b: u64, rng: &mut R) -> Result<Vec<u64>> {
    if b == 0 || b > r {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= b <= r, got b={b}, r={r}"
        )));
    }
    if b == 1 {
        return Ok(vec![r]);
    }
    // b-1 distinct cut points among {1, ..., r-1}
    let idx = rand::seq::index::sample(rng, (r - 1) as usize, (b - 1) as usize);
    let mut cuts: Vec<u64> = idx.into_iter().map(|i| i as u64 + 1).collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(b as usize);
    let mut prev = 0;
    for c in cuts {
        parts.push(c - prev);
        prev = c;
    }
    parts.push(r - prev);
    Ok(parts)
}

/// Volume of the translation set of `b` cyclically anchored blocks:
/// `T = M0 (1-W)^{b-1}/(b-1)! + (1-W)^b/b!`.
pub fn translation_measure(m0: f64, total_mass: f64, b: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&total_mass) || m0 < 0.0 || m0 > total_mass + 1e-12 || b == 0 {
        return Err(Error::InvalidParameter(format!(
            "bad translation-set arguments M0={m0}, W={total_mass}, b={b}"
        )));
    }
    let r = 1.0 - total_mass;
    let mut fact = 1.0; // (b-1)!
    for i in 1..b {
        fact *= i as f64;
    }
    Ok(m0 * r.powi(b as i32 - 1) / fact + r.powi(b as i32) / (fact * b as f64))
}

/// Density (per unit `da_j` each) of observing block starts `starts` with
/// the ordered partition `parts` of mass indices: `prod_j Q(m(J_j))` under
/// the cyclic anchoring; zero when the ordering or gap condition fails.
pub fn joint_block_density(
    masses: &[f64],
    parts: &[Vec<usize>],
    starts: &[CirclePoint<f64>],
) -> Result<f64> {
    let k = masses.len();
    if k > MAX_PARTITION_K {
        return Err(Error::EnumerationCap(format!("k={k} > {MAX_PARTITION_K}")));
    }
    let b = parts.len();
    if b == 0 || b != starts.len() {
        return Err(Error::InvalidParameter(
            "partition and starts must have equal positive length".into(),
        ));
    }
    let mut seen = vec![false; k];
    for part in parts {
        if part.is_empty() {
            return Err(Error::InvalidParameter("empty partition part".into()));
        }
        for &i in part {
            if i >= k || seen[i] {
                return Err(Error::InvalidParameter("not a partition".into()));
            }
            seen[i] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::InvalidParameter("partition does not cover".into()));
    }

    // cyclic ordering: consecutive gaps sum to one full turn
    let origin = CirclePoint::new(0.0);
    if b > 1 {
        let total: f64 = (0..b)
            .map(|i| dist_pos(starts[i], starts[(i + 1) % b]))
            .sum();
        if (total - 1.0).abs() > 1e-9 {
            return Ok(0.0);
        }
        // anchoring: the origin lies in [a_0, a_1)
        if dist_pos(starts[0], origin) >= dist_pos(starts[0], starts[1]) {
            return Ok(0.0);
        }
    }

    let mut density = 1.0;
    for (i, part) in parts.iter().enumerate() {
        let w: f64 = part.iter().map(|&j| masses[j]).sum();
        let gap = if b == 1 {
            1.0
        } else {
            dist_pos(starts[i], starts[(i + 1) % b])
        };
        if gap <= w {
            return Ok(0.0);
        }
        density *= w.powi(part.len() as i32 - 1);
    }
    Ok(density)
}

/// `P(|O_j| = M_j for all j)` for the anchored labeling: the translation-set
/// volume times the partition sum over ordered partitions whose per-label
/// weights match `block_lengths`.
pub fn block_length_law(masses: &[f64], block_lengths: &[f64]) -> Result<f64> {
    let k = masses.len();
    let b = block_lengths.len();
    if k == 0 || b == 0 || b > k {
        return Err(Error::InvalidParameter("need 1 <= b <= k".into()));
    }
    if k > MAX_PARTITION_K {
        return Err(Error::EnumerationCap(format!("k={k} > {MAX_PARTITION_K}")));
    }
    let total: f64 = masses.iter().sum();
    let t = translation_measure(block_lengths[0], total, b as u32)?;

    let tol = 1e-9;
    let mut sum = 0.0;
    for_each_partition(k, |rgs, blocks| {
        if blocks != b {
            return;
        }
        let mut weights = vec![0.0; b];
        let mut sizes = vec![0usize; b];
        for (i, &blk) in rgs.iter().enumerate() {
            weights[blk] += masses[i];
            sizes[blk] += 1;
        }
        // number of bijections parts -> labels respecting the weights
        let matchings = count_weight_matchings(&weights, block_lengths, tol);
        if matchings == 0 {
            return;
        }
        let q: f64 = weights
            .iter()
            .zip(&sizes)
            .map(|(&w, &s)| w.powi(s as i32 - 1))
            .product();
        sum += matchings as f64 * q;
    })?;
    Ok(t * sum)
}

/// Number of bijections between `weights` and `targets` matching within
/// `tol` (product of factorials of group multiplicities when the multisets
/// agree, zero otherwise).
fn count_weight_matchings(weights: &[f64], targets: &[f64], tol: f64) -> u64 {
    let b = weights.len();
    let mut used = vec![false; b];
    let mut count = 1u64;
    // group the weights by approximate value
    let mut i = 0;
    let mut wsorted: Vec<f64> = weights.to_vec();
    wsorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tsorted: Vec<f64> = targets.to_vec();
    tsorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    while i < b {
        let v = wsorted[i];
        let mut group = 0u64;
        while i < b && (wsorted[i] - v).abs() <= tol {
            group += 1;
            i += 1;
        }
        // match the same group among the targets
        let mut hits = 0u64;
        for (j, &t) in tsorted.iter().enumerate() {
            if !used[j] && (t - v).abs() <= tol {
                used[j] = true;
                hits += 1;
            }
        }
        if hits != group {
            return 0;
        }
        count *= (1..=group).product::<u64>();
    }
    if used.iter().filter(|&&u| u).count() != b {
        return 0;
    }
    count
}

/// One-step transition of the block count: probabilities of `N' = 1, ...,
/// n_from + 1` given `N = n_from` blocks, current total mass, and the next
/// mass.  Index `j` of the result holds `P(N' = j + 1)`.
pub fn transition_n_continuous(n_from: u32, total_mass: f64, m_next: f64) -> Result<Vec<f64>> {
    if n_from == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    let w = total_mass;
    let r = 1.0 - w;
    if m_next < 0.0 || w < 0.0 || w + m_next >= 1.0 {
        return Err(Error::MassOverflow(w + m_next));
    }
    let n = n_from as usize;
    let x = m_next / r;
    let mut out = vec![0.0; n + 1];
    // N -> n+1: arrival in free space, the mass fits before the next block
    out[n] = r * (1.0 - x).powi(n as i32);
    // N -> n-j: absorb j+1 spacings from a free arrival, or j from an
    // occupied one
    for j in 0..n {
        let free_term = binomial_f64(n as u64, (j + 1) as u64)
            * x.powi((j + 1) as i32)
            * (1.0 - x).powi((n - 1 - j) as i32);
        let occ_term = binomial_f64((n - 1) as u64, j as u64)
            * x.powi(j as i32)
            * (1.0 - x).powi((n - 1 - j) as i32);
        out[n - 1 - j] = r * free_term + w * occ_term;
    }
    Ok(out)
}

/// Distribution of `N_k` obtained by composing one-step transitions over the
/// mass list (Chapman–Kolmogorov route).  Index `j` holds `P(N_k = j+1)`.
pub fn compose_transitions(masses: &[f64]) -> Result<Vec<f64>> {
    if masses.is_empty() {
        return Err(Error::InvalidParameter("need at least one mass".into()));
    }
    let mut dist = vec![1.0]; // N_1 = 1 surely
    let mut w = masses[0];
    for &m in &masses[1..] {
        let mut next = vec![0.0; dist.len() + 1];
        for (j, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = transition_n_continuous((j + 1) as u32, w, m)?;
            for (i, &q) in row.iter().enumerate() {
                next[i] += p * q;
            }
        }
        dist = next;
        w += m;
    }
    Ok(dist)
}

/// Exact law of the block count on the grid: `P(N_k^{(n)} = 1+c)` for
/// masses summing to `mass_units / n`, via surjection counts.
pub fn pmf_n_discrete_exact(k: u32, mass_units: u64, n: u64) -> Result<Vec<BigRational>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if mass_units >= n {
        return Err(Error::MassOverflow(mass_units as f64 / n as f64));
    }
    let m_cov = mass_units; // covered grid points beyond the first block point
    let kk = k as u64;
    let denom_words = BigInt::from(n).pow(k);
    let max_c = (kk.min(n) - 1).min(n - 1 - m_cov);
    let mut out = vec![BigRational::zero(); kk as usize];
    for c in 0..=max_c {
        let mut total = BigRational::zero();
        for m in (c + 1)..=kk.min(n) {
            // P(|Z_k| = m) * hypergeometric factor
            let words = binomial_big(n, m) * surjections(kk, m);
            let hyper_num = binomial_big(n - 1 - m_cov, c) * binomial_big(m_cov, m - 1 - c);
            let hyper_den = binomial_big(n - 1, m - 1);
            if hyper_den.is_zero() {
                continue;
            }
            total += BigRational::new(words * hyper_num, denom_words.clone() * hyper_den);
        }
        out[c as usize] = total;
    }
    Ok(out)
}

/// f64 view of [`pmf_n_discrete_exact`].
pub fn pmf_n_discrete(k: u32, total_mass: f64, n: u64) -> Result<Vec<f64>> {
    let units = (total_mass * n as f64).round() as u64;
    if ((units as f64 / n as f64) - total_mass).abs() > 1e-9 {
        return Err(Error::OffGrid { n });
    }
    Ok(pmf_n_discrete_exact(k, units, n)?
        .iter()
        .map(|q| q.to_f64().unwrap())
        .collect())
}

/// `P(S_j <= x < S_{j+1})` for the partial sums of a `DDirichlet(r, parts)`
/// vector: `C(x, j) C(r-1-x, parts-1-j) / C(r-1, parts-1)`.
fn ddirichlet_partial(r: u64, parts: u64, j: u64, x: u64) -> BigRational {
    if parts == 0 || r == 0 {
        return BigRational::zero();
    }
    let den = binomial_big(r - 1, parts - 1);
    if den.is_zero() {
        return BigRational::zero();
    }
    if x > r - 1 || j > x {
        return BigRational::zero();
    }
    let num = binomial_big(x, j) * binomial_big(r - 1 - x, parts - 1 - j);
    BigRational::new(num, den)
}

/// Grid analogue of [`transition_n_continuous`]: probabilities of
/// `N' = 1, ..., b+1` given `b` blocks, covered mass `mass_units / n`, and
/// next mass `m_units / n`.
pub fn transition_n_discrete(b: u32, mass_units: u64, n: u64, m_units: u64) -> Result<Vec<f64>> {
    if b == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    if mass_units + m_units >= n {
        return Err(Error::MassOverflow(
            (mass_units + m_units) as f64 / n as f64,
        ));
    }
    if mass_units + b as u64 > n {
        // b blocks of total length mass_units/n cover mass_units + b grid
        // points, which must fit on the cycle
        return Err(Error::InvalidParameter(format!(
            "{b} blocks with {mass_units} mass units cannot fit on C_{n}"
        )));
    }
    let bb = b as u64;
    // covered grid points: mass_units + b (a length-l/n block covers l+1)
    let q_b = BigRational::new(BigInt::from(mass_units + bb), BigInt::from(n));
    let p_b = BigRational::one() - q_b.clone();
    let r_units = n - mass_units; // free units before the new mass
    let x = m_units;

    let mut out = vec![BigRational::zero(); b as usize + 1];
    // N -> b+1: the new point splits a gap and the mass stays short of the
    // next block; P(x < S_1) = P(S_0 <= x < S_1)
    out[b as usize] = p_b.clone() * ddirichlet_partial(r_units, bb + 1, 0, x);
    for j in 0..bb {
        let free_term = ddirichlet_partial(r_units, bb + 1, j + 1, x);
        let occ_term = ddirichlet_partial(r_units, bb, j, x);
        out[(bb - 1 - j) as usize] = p_b.clone() * free_term + q_b.clone() * occ_term;
    }
    Ok(out.iter().map(|q| q.to_f64().unwrap()).collect())
}

/// Density of the anchored free block `|F_0|` conditional on `N_k = b >= 2`:
/// mixture of the Dirichlet first marginal (origin covered, weight `W`) and
/// the size-biased marginal (origin free, weight `R`), both scaled to
/// `[0, R]`.
pub fn biased_f0_density(b: u32, free_total: f64, x: f64) -> Result<f64> {
    if b < 2 {
        return Err(Error::InvalidParameter(
            "b = 1 is the degenerate point mass at R".into(),
        ));
    }
    if !(0.0..=1.0).contains(&free_total) || free_total == 0.0 {
        return Err(Error::InvalidParameter(format!("bad R={free_total}")));
    }
    if !(0.0..=free_total).contains(&x) {
        return Ok(0.0);
    }
    let r = free_total;
    let y = x / r;
    let bm1 = (b - 1) as f64;
    let g1 = bm1 * (1.0 - y).powi(b as i32 - 2) / r;
    let g2 = (b as f64) * bm1 * y * (1.0 - y).powi(b as i32 - 2) / r;
    Ok((1.0 - r) * g1 + r * g2)
}

/// CDF matching [`biased_f0_density`].
pub fn biased_f0_cdf(b: u32, free_total: f64, x: f64) -> Result<f64> {
    if b < 2 {
        return Err(Error::InvalidParameter("b must be >= 2".into()));
    }
    let r = free_total;
    let y = (x / r).clamp(0.0, 1.0);
    let bm1 = (b - 1) as f64;
    // Beta(1, b-1): 1 - (1-y)^{b-1}; Beta(2, b-1) via its closed form
    let cdf1 = 1.0 - (1.0 - y).powf(bm1);
    let cdf2 = 1.0 - (1.0 - y).powf(bm1) * (1.0 + bm1 * y);
    Ok((1.0 - r) * cdf1 + r * cdf2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pmf_examples() {
        let p = pmf_n_continuous(3, 0.6).unwrap();
        assert!(approx(p[0], 0.36, 1e-12));
        assert!(approx(p[1], 0.48, 1e-12));
        assert!(approx(p[2], 0.16, 1e-12));
        assert!(approx(p.iter().sum::<f64>(), 1.0, 1e-12));

        let p1 = pmf_n_continuous(1, 0.3).unwrap();
        assert_eq!(p1, vec![1.0]);

        let p0 = pmf_n_continuous(4, 0.0).unwrap();
        assert_eq!(p0[3], 1.0); // all singletons as W -> 0
    }

    #[test]
    fn piling_values() {
        assert!(approx(piling_q(2, 0.5), 0.5, 1e-15));
        assert!(approx(piling_q(1, 0.7), 1.0, 1e-15));
        assert!(approx(piling_q_discrete(2, 0.5, 10), 0.6, 1e-15));
        let exact = piling_q_discrete_exact(2, 5, 10);
        assert_eq!(exact, BigRational::new(BigInt::from(6), BigInt::from(10)));
        // pmf[0] is the piling propensity
        for &(k, w) in &[(2u32, 0.3), (4, 0.55), (6, 0.8)] {
            let p = pmf_n_continuous(k, w).unwrap();
            assert!(approx(p[0], piling_q(k, w), 1e-12));
        }
    }

    #[test]
    fn dirichlet_sampler_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        assert_eq!(sample_dirichlet_free(1, 0.4, &mut rng).unwrap(), vec![0.4]);
        let v = sample_dirichlet_free(2, 0.7, &mut rng).unwrap();
        assert!(approx(v.iter().sum::<f64>(), 0.7, 1e-12));
        // empirical marginal mean R/b over many draws
        let (b, r, trials) = (4usize, 0.8, 100_000);
        let mut mean = 0.0;
        for _ in 0..trials {
            let v = sample_dirichlet_free(b, r, &mut rng).unwrap();
            mean += v[0];
        }
        mean /= trials as f64;
        let want = r / b as f64;
        // var of one spacing ~ (R/b)^2; 3 sigma band
        let sigma = want / (trials as f64).sqrt() * 3.0;
        assert!(approx(mean, want, 3.0 * sigma.max(1e-4)));
    }

    #[test]
    fn ddirichlet_sampler_uniformity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(sample_ddirichlet(5, 1, &mut rng).unwrap(), vec![5]);
        let mut counts = std::collections::BTreeMap::new();
        let trials = 60_000;
        for _ in 0..trials {
            let v = sample_ddirichlet(5, 3, &mut rng).unwrap();
            assert_eq!(v.iter().sum::<u64>(), 5);
            *counts.entry(v).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6); // C(4,2) compositions
        for &c in counts.values() {
            let expect = trials as f64 / 6.0;
            assert!((c as f64 - expect).abs() < 5.0 * expect.sqrt());
        }
    }

    #[test]
    fn translation_measure_values() {
        assert!(approx(
            translation_measure(0.5, 0.5, 1).unwrap(),
            1.0,
            1e-15
        ));
        assert!(approx(
            translation_measure(0.2, 0.5, 2).unwrap(),
            0.225,
            1e-15
        ));
        // decreasing in W at fixed M0, b
        let mut prev = f64::INFINITY;
        for w in [0.3, 0.4, 0.5, 0.6, 0.7] {
            let t = translation_measure(0.2, w, 3).unwrap();
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn joint_density_single_block() {
        let masses = [0.1, 0.2, 0.15];
        let starts = [CirclePoint::new(0.4)];
        let d = joint_block_density(&masses, &[vec![0, 1, 2]], &starts).unwrap();
        assert!(approx(d, 0.45 * 0.45, 1e-12));
    }

    #[test]
    fn joint_density_gap_violation_zero() {
        let masses = [0.3, 0.3];
        // blocks at 0.9 and 0.1: first gap 0.2 < 0.3
        let starts = [CirclePoint::new(0.9), CirclePoint::new(0.1)];
        let d = joint_block_density(&masses, &[vec![0], vec![1]], &starts).unwrap();
        assert_eq!(d, 0.0);
        // generous spacing, anchored correctly
        let starts = [CirclePoint::new(0.9), CirclePoint::new(0.4)];
        let d = joint_block_density(&masses, &[vec![0], vec![1]], &starts).unwrap();
        assert!(d > 0.0);
    }

    #[test]
    fn joint_density_equal_mass_multinomial() {
        // summed over compatible ordered partitions the density matches
        // multinomial(k; k_0..k_{b-1}) * prod (k_j w)^{k_j - 1}
        let w = 0.08;
        let k = 4;
        let masses = vec![w; k];
        let starts = [CirclePoint::new(0.9), CirclePoint::new(0.35)];
        // target composition: 3 masses then 1 mass
        let (k0, k1) = (3usize, 1usize);
        let mut total = 0.0;
        for_each_partition(k, |rgs, blocks| {
            if blocks != 2 {
                return;
            }
            // both assignments of parts to (first, second) labels
            for flip in [false, true] {
                let part0: Vec<usize> = (0..k).filter(|&i| (rgs[i] == 0) != flip).collect();
                let part1: Vec<usize> = (0..k).filter(|&i| (rgs[i] == 0) == flip).collect();
                if part0.len() != k0 || part1.len() != k1 {
                    continue;
                }
                total += joint_block_density(&masses, &[part0, part1], &starts).unwrap();
            }
        })
        .unwrap();
        let multi = binomial_f64(k as u64, k0 as u64);
        let want =
            multi * (k0 as f64 * w).powi(k0 as i32 - 1) * (k1 as f64 * w).powi(k1 as i32 - 1);
        assert!(approx(total, want, 1e-12), "{total} vs {want}");
    }

    #[test]
    fn block_length_law_cross_checks() {
        // two masses forming one block
        let p = block_length_law(&[0.2, 0.2], &[0.4]).unwrap();
        assert!(approx(p, 0.4, 1e-12));
        assert!(approx(p, pmf_n_continuous(2, 0.4).unwrap()[0], 1e-12));
        // impossible lengths
        let p = block_length_law(&[0.2, 0.2], &[0.3]).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn block_length_law_total_mass_one() {
        // summing the labeled law over all ordered partitions equals 1:
        // total = sum over unordered partitions of prod Q * (b-1)! * sum_i T(w_i)
        for masses in [vec![0.3, 0.15], vec![0.1, 0.2, 0.25], vec![0.1; 6]] {
            let w: f64 = masses.iter().sum();
            let k = masses.len();
            let mut total = 0.0;
            for_each_partition(k, |rgs, blocks| {
                let mut weights = vec![0.0; blocks];
                let mut sizes = vec![0usize; blocks];
                for (i, &b) in rgs.iter().enumerate() {
                    weights[b] += masses[i];
                    sizes[b] += 1;
                }
                let q: f64 = weights
                    .iter()
                    .zip(&sizes)
                    .map(|(&wt, &s)| wt.powi(s as i32 - 1))
                    .product();
                let mut fact = 1.0;
                for i in 1..blocks {
                    fact *= i as f64;
                }
                let t_sum: f64 = weights
                    .iter()
                    .map(|&wt| translation_measure(wt, w, blocks as u32).unwrap())
                    .sum();
                total += q * fact * t_sum;
            })
            .unwrap();
            assert!(approx(total, 1.0, 1e-10), "masses {masses:?}: {total}");
        }
    }

    #[test]
    fn transition_rows_stochastic() {
        for n in 1..=6u32 {
            for &(w, m) in &[(0.2, 0.1), (0.0, 0.3), (0.5, 0.0), (0.6, 0.35)] {
                let row = transition_n_continuous(n, w, m).unwrap();
                assert!(approx(row.iter().sum::<f64>(), 1.0, 1e-12), "{row:?}");
                assert!(row.iter().all(|&p| p >= -1e-15));
            }
        }
    }

    #[test]
    fn transition_examples() {
        // one block, R = 0.5, next mass 0.25
        let row = transition_n_continuous(1, 0.5, 0.25).unwrap();
        assert!(approx(row[1], 0.25, 1e-12)); // P(N=2) = R (1 - m/R)
        assert!(approx(row[0], 0.75, 1e-12));
        // zero mass: new point with probability R
        let row = transition_n_continuous(3, 0.4, 0.0).unwrap();
        assert!(approx(row[3], 0.6, 1e-12));
        assert!(approx(row[2], 0.4, 1e-12));
        assert!(approx(row[0] + row[1], 0.0, 1e-15));
    }

    #[test]
    fn chapman_kolmogorov_reproduces_binomial() {
        for masses in [
            vec![0.1, 0.2, 0.05, 0.15],
            vec![0.3, 0.0, 0.2],
            vec![0.05; 6],
        ] {
            let w: f64 = masses.iter().sum();
            let composed = compose_transitions(&masses).unwrap();
            let direct = pmf_n_continuous(masses.len() as u32, w).unwrap();
            for (a, b) in composed.iter().zip(&direct) {
                assert!(approx(*a, *b, 1e-10), "{composed:?} vs {direct:?}");
            }
        }
    }

    #[test]
    fn discrete_pmf_zero_masses_matches_distinct_point_count() {
        // all-zero masses: N = number of distinct arrival points; compare
        // against exhaustive enumeration over 6^3 words
        let (n, k) = (6u64, 3u32);
        let pmf = pmf_n_discrete_exact(k, 0, n).unwrap();
        let mut counts = vec![0u64; k as usize];
        for w0 in 0..n {
            for w1 in 0..n {
                for w2 in 0..n {
                    let mut s = vec![w0, w1, w2];
                    s.sort_unstable();
                    s.dedup();
                    counts[s.len() - 1] += 1;
                }
            }
        }
        let total = n.pow(k);
        for (c, p) in counts.iter().zip(&pmf) {
            let want = BigRational::new(BigInt::from(*c), BigInt::from(total));
            assert_eq!(*p, want);
        }
    }

    #[test]
    fn discrete_pmf_piling_and_normalization() {
        let (n, k, units) = (6u64, 3u32, 3u64);
        let pmf = pmf_n_discrete_exact(k, units, n).unwrap();
        let total: BigRational = pmf.iter().cloned().sum();
        assert_eq!(total, BigRational::one());
        assert_eq!(pmf[0], piling_q_discrete_exact(k, units, n));
        // k = 1
        let pmf1 = pmf_n_discrete_exact(1, 2, 8).unwrap();
        assert_eq!(pmf1[0], BigRational::one());
    }

    #[test]
    fn discrete_transition_rows_stochastic() {
        for &(b, mass, n, m) in &[(1u32, 1u64, 4u64, 1u64), (2, 2, 8, 1), (3, 2, 12, 3)] {
            let row = transition_n_discrete(b, mass, n, m).unwrap();
            assert!(
                approx(row.iter().sum::<f64>(), 1.0, 1e-12),
                "b={b} mass={mass} n={n} m={m}: {row:?}"
            );
        }
        // hand-enumerated case: n=4, one unit block, one more unit mass
        let row = transition_n_discrete(1, 1, 4, 1).unwrap();
        assert!(approx(row[1], 0.25, 1e-12));
        assert!(approx(row[0], 0.75, 1e-12));
        // zero next mass: fresh point with probability p_b
        let row = transition_n_discrete(1, 1, 4, 0).unwrap();
        assert!(approx(row[1], 0.5, 1e-12));
        assert!(approx(row[0], 0.5, 1e-12));
    }

    #[test]
    fn biased_f0_density_integrates_to_one() {
        for b in 2..=5u32 {
            let r = 0.4;
            let steps = 20_000;
            let mut integral = 0.0;
            for i in 0..steps {
                let x = (i as f64 + 0.5) / steps as f64 * r;
                integral += biased_f0_density(b, r, x).unwrap() * r / steps as f64;
            }
            assert!(approx(integral, 1.0, 1e-3), "b={b}: {integral}");
            assert!(approx(biased_f0_cdf(b, r, r).unwrap(), 1.0, 1e-12));
            assert!(approx(biased_f0_cdf(b, r, 0.0).unwrap(), 0.0, 1e-12));
        }
        assert!(biased_f0_density(1, 0.4, 0.2).is_err());
    }
}
