//! Statistical machinery for the verification suite: goodness-of-fit and
//! two-sample tests with reproducible seeded trial plans, policy-law
//! comparisons, and exhaustive small-grid oracles.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

use crate::circle::OccupiedConfig;
use crate::discrete::{discrete_relax_law, DiscreteConfig, DiscretePolicy};
use crate::laws::piling_q_discrete_exact;
use crate::policy::{relax, MassEvent, PolicyId};
use crate::{Error, Result};

/// Reproducible Monte Carlo plan: the RNG of trial `i` is the `i`-th stream
/// of a ChaCha generator seeded with the master seed, so results do not
/// depend on scheduling.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialPlan {
    pub master_seed: u64,
    pub trials: usize,
}

impl TrialPlan {
    pub fn new(master_seed: u64, trials: usize) -> Self {
        TrialPlan {
            master_seed,
            trials,
        }
    }

    /// Stream for one trial index.
    pub fn rng(&self, trial: u64) -> ChaCha8Rng {
        trial_rng(self.master_seed, trial)
    }
}

/// Independent stream for one trial.
pub fn trial_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Result of one statistical check.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
    pub p_value: Option<f64>,
}

impl TestReport {
    fn from_p_value(name: &str, statistic: &str, p: f64, alpha: f64, samples: usize) -> Self {
        TestReport {
            name: name.to_string(),
            statistic: statistic.to_string(),
            value: p,
            threshold: alpha,
            pass: p >= alpha,
            samples,
            p_value: Some(p),
        }
    }
}

/// Asymptotic Kolmogorov survival function `Q(lambda)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut q = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        q += if j % 2 == 1 { 2.0 * term } else { -2.0 * term };
    }
    q.clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test at level `alpha`.
pub fn ks_two_sample(xs: &[f64], ys: &[f64], alpha: f64, name: &str) -> Result<TestReport> {
    if xs.len() < 50 || ys.len() < 50 {
        return Err(Error::DegenerateSample(format!(
            "KS needs >= 50 samples per side, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let p = kolmogorov_q(lambda);
    Ok(TestReport::from_p_value(
        name,
        "KS two-sample D",
        p,
        alpha,
        n + m,
    ))
}

/// One-sample KS against a CDF.
pub fn ks_one_sample(
    xs: &[f64],
    cdf: impl Fn(f64) -> f64,
    alpha: f64,
    name: &str,
) -> Result<TestReport> {
    if xs.len() < 50 {
        return Err(Error::DegenerateSample("KS needs >= 50 samples".into()));
    }
    let mut a = xs.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p = kolmogorov_q(lambda);
    Ok(TestReport::from_p_value(
        name,
        "KS one-sample D",
        p,
        alpha,
        a.len(),
    ))
}

/// Pearson chi-square goodness of fit against expected probabilities.
/// Cells with expected count below 5 are pooled.
pub fn chi2_gof(
    observed: &[u64],
    expected_probs: &[f64],
    alpha: f64,
    name: &str,
) -> Result<TestReport> {
    if observed.len() != expected_probs.len() || observed.is_empty() {
        return Err(Error::DegenerateSample("mismatched chi2 inputs".into()));
    }
    let total: u64 = observed.iter().sum();
    if total < 50 {
        return Err(Error::DegenerateSample("chi2 needs >= 50 samples".into()));
    }
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut pool_obs = 0.0;
    let mut pool_exp = 0.0;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * total as f64;
        if e < 5.0 {
            pool_obs += o as f64;
            pool_exp += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pool_exp > 0.0 {
        cells.push((pool_obs, pool_exp));
    }
    if cells.len() < 2 {
        return Err(Error::DegenerateSample("chi2 needs >= 2 cells".into()));
    }
    let x2: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (cells.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(x2);
    Ok(TestReport::from_p_value(
        name,
        "chi2 GOF",
        p,
        alpha,
        total as usize,
    ))
}

/// Two-sample chi-square over discrete categories (2 x C contingency),
/// pooling categories with combined count below 10.
pub fn chi2_two_sample<K: Ord + Clone>(
    a: &BTreeMap<K, u64>,
    b: &BTreeMap<K, u64>,
    alpha: f64,
    name: &str,
) -> Result<TestReport> {
    let mut keys: Vec<K> = a.keys().chain(b.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for k in keys {
        let oa = *a.get(&k).unwrap_or(&0) as f64;
        let ob = *b.get(&k).unwrap_or(&0) as f64;
        if oa + ob < 10.0 {
            pool.0 += oa;
            pool.1 += ob;
        } else {
            rows.push((oa, ob));
        }
    }
    if pool.0 + pool.1 > 0.0 {
        rows.push(pool);
    }
    let na: f64 = rows.iter().map(|r| r.0).sum();
    let nb: f64 = rows.iter().map(|r| r.1).sum();
    if rows.len() < 2 || na < 25.0 || nb < 25.0 {
        return Err(Error::DegenerateSample(
            "chi2 two-sample underpowered".into(),
        ));
    }
    let grand = na + nb;
    let mut x2 = 0.0;
    for (oa, ob) in &rows {
        let rt = oa + ob;
        let ea = rt * na / grand;
        let eb = rt * nb / grand;
        if ea > 0.0 {
            x2 += (oa - ea) * (oa - ea) / ea;
        }
        if eb > 0.0 {
            x2 += (ob - eb) * (ob - eb) / eb;
        }
    }
    let dof = (rows.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(x2);
    Ok(TestReport::from_p_value(
        name,
        "chi2 2xC",
        p,
        alpha,
        grand as usize,
    ))
}

/// Per-trial summary of a policy run.
#[derive(Debug, Clone)]
pub struct TrialSummary {
    pub n_blocks: usize,
    /// occupied lengths, descending
    pub occ: Vec<f64>,
    /// free lengths, descending
    pub free: Vec<f64>,
    /// free lengths in anchored cyclic label order `F_0, F_1, ...`
    pub free_labeled: Vec<f64>,
    /// sorted occupied lengths after every step (the size process)
    pub size_process: Vec<Vec<f64>>,
    /// steps at which exactly one free component shrank
    pub single_free_reductions: usize,
}

/// Run `trials` dispersions of `masses` under `policy` with per-trial RNG
/// streams `stream_base + i`.
pub fn run_policy_trials(
    policy: PolicyId,
    masses: &[f64],
    trials: usize,
    master_seed: u64,
    stream_base: u64,
) -> Result<Vec<TrialSummary>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, stream_base + i as u64);
            let mut cfg = OccupiedConfig::new();
            let mut size_process = Vec::with_capacity(masses.len() + 1);
            size_process.push(vec![]);
            let mut single_free_reductions = 0usize;
            let mut prev_free: Vec<f64> = vec![1.0];
            for &m in masses {
                let u: f64 = rng.gen();
                let (next, _) = relax(&cfg, MassEvent::new(u, m), policy, &mut rng)?;
                cfg = next;
                size_process.push(cfg.sorted_lengths());
                let free_now: Vec<f64> = {
                    let mut f: Vec<f64> = cfg.free_components().iter().map(|x| x.1).collect();
                    f.sort_by(|a, b| b.partial_cmp(a).unwrap());
                    f
                };
                if single_reduction(&prev_free, &free_now) {
                    single_free_reductions += 1;
                }
                prev_free = free_now;
            }
            let mut occ = cfg.sorted_lengths();
            occ.reverse();
            let free_labeled = cfg
                .label_blocks()
                .map(|l| l.free_lengths)
                .unwrap_or_default();
            let mut free = free_labeled.clone();
            free.sort_by(|a, b| b.partial_cmp(a).unwrap());
            Ok(TrialSummary {
                n_blocks: cfg.num_components(),
                occ,
                free,
                free_labeled,
                size_process,
                single_free_reductions,
            })
        })
        .collect()
}

/// Did exactly one free component shrink (one length removed, one smaller
/// length added)?
fn single_reduction(before: &[f64], after: &[f64]) -> bool {
    let tol = 1e-12;
    let mut removed: Vec<f64> = Vec::new();
    let mut added: Vec<f64> = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < before.len() && j < after.len() {
        if (before[i] - after[j]).abs() <= tol {
            i += 1;
            j += 1;
        } else if before[i] > after[j] {
            removed.push(before[i]);
            i += 1;
        } else {
            added.push(after[j]);
            j += 1;
        }
    }
    removed.extend_from_slice(&before[i..]);
    added.extend_from_slice(&after[j..]);
    removed.len() == 1 && added.len() == 1 && added[0] < removed[0]
}

/// Compare the joint final-configuration law across policies: chi-square on
/// the block count plus per-rank KS on occupied and free lengths, Bonferroni
/// over all pairwise tests.  All tests must pass.
pub fn universality_test(
    policies: &[PolicyId],
    masses: &[f64],
    trials: usize,
    master_seed: u64,
    alpha_family: f64,
) -> Result<Vec<TestReport>> {
    if policies.len() < 2 {
        return Err(Error::InvalidParameter("need >= 2 policies".into()));
    }
    let k = masses.len();
    let mut summaries = Vec::new();
    for (pi, &p) in policies.iter().enumerate() {
        summaries.push(run_policy_trials(
            p,
            masses,
            trials,
            master_seed,
            (pi * trials) as u64,
        )?);
    }
    let pairs = policies.len() * (policies.len() - 1) / 2;
    let tests_per_pair = 1 + 2 * k;
    let alpha = alpha_family / (pairs * tests_per_pair) as f64;

    let mut reports = Vec::new();
    for i in 0..policies.len() {
        for j in i + 1..policies.len() {
            let (a, b) = (&summaries[i], &summaries[j]);
            let name = format!("{:?} vs {:?}", policies[i], policies[j]);
            let ca = count_by(a, |s| s.n_blocks as u64);
            let cb = count_by(b, |s| s.n_blocks as u64);
            reports.push(chi2_two_sample(&ca, &cb, alpha, &format!("{name}: N"))?);
            for r in 0..k {
                let xa: Vec<f64> = a.iter().map(|s| rank_or_zero(&s.occ, r)).collect();
                let xb: Vec<f64> = b.iter().map(|s| rank_or_zero(&s.occ, r)).collect();
                reports.push(ks_two_sample(
                    &xa,
                    &xb,
                    alpha,
                    &format!("{name}: occ[{r}]"),
                )?);
                let fa: Vec<f64> = a.iter().map(|s| rank_or_zero(&s.free, r)).collect();
                let fb: Vec<f64> = b.iter().map(|s| rank_or_zero(&s.free, r)).collect();
                reports.push(ks_two_sample(
                    &fa,
                    &fb,
                    alpha,
                    &format!("{name}: free[{r}]"),
                )?);
            }
        }
    }
    Ok(reports)
}

fn rank_or_zero(v: &[f64], r: usize) -> f64 {
    v.get(r).copied().unwrap_or(0.0)
}

fn count_by(s: &[TrialSummary], f: impl Fn(&TrialSummary) -> u64) -> BTreeMap<u64, u64> {
    let mut m = BTreeMap::new();
    for x in s {
        *m.entry(f(x)).or_insert(0) += 1;
    }
    m
}

/// Conditional on `N_k = b`, rotate the free-length vector by an independent
/// uniform index and KS-test each rotated partial sum `S_j / R` against
/// `Beta(j, b - j)`.
pub fn dirichlet_spacing_test(
    policy: PolicyId,
    masses: &[f64],
    b: usize,
    conditioned_samples: usize,
    master_seed: u64,
    stream_base: u64,
    alpha: f64,
) -> Result<Vec<TestReport>> {
    if b < 2 {
        return Ok(vec![TestReport {
            name: format!("{policy:?}: spacing b=1"),
            statistic: "degenerate".into(),
            value: 0.0,
            threshold: alpha,
            pass: true,
            samples: 0,
            p_value: None,
        }]);
    }
    let total: f64 = masses.iter().sum();
    let free_total = 1.0 - total;
    // run batches until enough conditioned samples are collected
    let mut sums: Vec<Vec<f64>> = vec![Vec::new(); b - 1];
    let batch = (conditioned_samples * 3).max(1000);
    let mut stream = stream_base;
    let mut guard = 0;
    while sums[0].len() < conditioned_samples {
        guard += 1;
        if guard > 50 {
            return Err(Error::DegenerateSample(format!(
                "conditioning on N={b} too rare (have {})",
                sums[0].len()
            )));
        }
        let runs = run_policy_trials(policy, masses, batch, master_seed, stream)?;
        stream += batch as u64;
        let mut rot_rng = trial_rng(master_seed, stream);
        stream += 1;
        for s in &runs {
            if s.n_blocks != b || sums[0].len() >= conditioned_samples {
                continue;
            }
            // anchored labeling order, then a uniform rotation
            let theta = rot_rng.gen_range(0..b);
            let mut acc = 0.0;
            for (j, sum_j) in sums.iter_mut().enumerate() {
                acc += s.free_labeled[(j + theta) % b];
                sum_j.push(acc / free_total);
            }
        }
    }
    let alpha_adj = alpha / (b - 1) as f64;
    let mut reports = Vec::new();
    for (j, xs) in sums.iter().enumerate() {
        let beta = Beta::new((j + 1) as f64, (b - 1 - j) as f64).unwrap();
        reports.push(ks_one_sample(
            xs,
            |x| beta.cdf(x),
            alpha_adj,
            &format!("{policy:?}: S_{}/R vs Beta({},{})", j + 1, j + 1, b - 1 - j),
        )?);
    }
    Ok(reports)
}

/// Compare the law of the whole size-multiset trajectory across two
/// policies via a chi-square over discretized trajectory signatures.
pub fn process_universality_test(
    pa: PolicyId,
    pb: PolicyId,
    masses: &[f64],
    trials: usize,
    master_seed: u64,
    alpha: f64,
) -> Result<TestReport> {
    let a = run_policy_trials(pa, masses, trials, master_seed, 0)?;
    let b = run_policy_trials(pb, masses, trials, master_seed, trials as u64)?;
    let sig = |s: &TrialSummary| -> Vec<Vec<u64>> {
        s.size_process
            .iter()
            .map(|step| step.iter().map(|&l| (l * 1e6).round() as u64).collect())
            .collect()
    };
    let mut ca: BTreeMap<Vec<Vec<u64>>, u64> = BTreeMap::new();
    let mut cb = BTreeMap::new();
    for s in &a {
        *ca.entry(sig(s)).or_insert(0) += 1;
    }
    for s in &b {
        *cb.entry(sig(s)).or_insert(0) += 1;
    }
    chi2_two_sample(
        &ca,
        &cb,
        alpha,
        &format!("{pa:?} vs {pb:?}: occupied trajectory"),
    )
}

/// Compare the per-trial counts of single-free-component reductions (a
/// free-space trajectory statistic that valid policies need NOT share).
pub fn free_space_trajectory_test(
    pa: PolicyId,
    pb: PolicyId,
    masses: &[f64],
    trials: usize,
    master_seed: u64,
    alpha: f64,
) -> Result<TestReport> {
    let a = run_policy_trials(pa, masses, trials, master_seed, 0)?;
    let b = run_policy_trials(pb, masses, trials, master_seed, trials as u64)?;
    let ca = count_by(&a, |s| s.single_free_reductions as u64);
    let cb = count_by(&b, |s| s.single_free_reductions as u64);
    chi2_two_sample(
        &ca,
        &cb,
        alpha,
        &format!("{pa:?} vs {pb:?}: free shrink events"),
    )
}

/// Exact final-configuration distribution of a grid policy, summed over all
/// `n^k` arrival words (and over the policy's own randomness, which is
/// finite and rational for the particle model).
pub fn exhaustive_discrete_law(
    n: u64,
    masses_units: &[u64],
    policy: DiscretePolicy,
) -> Result<BTreeMap<Vec<(i64, i64)>, BigRational>> {
    let k = masses_units.len() as u32;
    if (n as f64).powi(k as i32) > 1e7 {
        return Err(Error::EnumerationCap(format!("n^k = {}^{k} too large", n)));
    }
    let inv_n = BigRational::new(BigInt::from(1), BigInt::from(n));
    let mut dist: BTreeMap<Vec<(i64, i64)>, (DiscreteConfig, BigRational)> = BTreeMap::new();
    let empty = DiscreteConfig::new(n);
    dist.insert(
        empty.key(),
        (empty, BigRational::new(BigInt::from(1), BigInt::from(1))),
    );
    for &m in masses_units {
        let mut next: BTreeMap<Vec<(i64, i64)>, (DiscreteConfig, BigRational)> = BTreeMap::new();
        for (state, p) in dist.values() {
            for u in 0..n {
                let outcomes = discrete_relax_law(state, u, m, policy)?;
                for (out, q) in outcomes {
                    let w = p.clone() * q * inv_n.clone();
                    next.entry(out.key())
                        .and_modify(|(_, acc)| *acc += w.clone())
                        .or_insert((out, w));
                }
            }
        }
        dist = next;
    }
    Ok(dist.into_iter().map(|(k, (_, p))| (k, p)).collect())
}

/// Exhaustive-oracle comparison: exact equality of final occupied-set
/// distributions across grid policies, plus the piling-propensity identity.
pub fn exhaustive_discrete_oracle(
    n: u64,
    masses_units: &[u64],
    policies: &[DiscretePolicy],
) -> Result<Vec<TestReport>> {
    let laws: Vec<_> = policies
        .iter()
        .map(|&p| exhaustive_discrete_law(n, masses_units, p))
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    for i in 1..laws.len() {
        let equal = laws[0] == laws[i];
        reports.push(TestReport {
            name: format!("{:?} vs {:?}: exact law equality", policies[0], policies[i]),
            statistic: "distribution equality".into(),
            value: if equal { 0.0 } else { 1.0 },
            threshold: 0.0,
            pass: equal,
            samples: laws[0].len(),
            p_value: None,
        });
    }
    // piling propensity: P(single block) = ((sum units + 1)/n)^{k-1}
    let k = masses_units.len() as u32;
    let total_units: u64 = masses_units.iter().sum();
    let want = piling_q_discrete_exact(k, total_units, n);
    let got: BigRational = laws[0]
        .iter()
        .filter(|(key, _)| key.len() == 1)
        .map(|(_, p)| p.clone())
        .fold(BigRational::zero(), |a, b| a + b);
    reports.push(TestReport {
        name: "discrete piling propensity".into(),
        statistic: "exact equality".into(),
        value: if got == want { 0.0 } else { 1.0 },
        threshold: 0.0,
        pass: got == want,
        samples: laws[0].len(),
        p_value: None,
    });
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_basic_behaviour() {
        let xs: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let r = ks_two_sample(&xs, &xs, 0.01, "identical").unwrap();
        assert!(r.pass && r.p_value.unwrap() > 0.99);

        let ys: Vec<f64> = xs.iter().map(|x| x + 10.0).collect();
        let r = ks_two_sample(&xs, &ys, 0.01, "disjoint").unwrap();
        assert!(!r.pass);

        let mut ra = trial_rng(11, 0);
        let mut rb = trial_rng(11, 1);
        let a: Vec<f64> = (0..10_000).map(|_| ra.gen()).collect();
        let b: Vec<f64> = (0..10_000).map(|_| rb.gen()).collect();
        let r = ks_two_sample(&a, &b, 0.01, "uniform calibration").unwrap();
        assert!(r.pass);

        let r = ks_one_sample(&a, |x| x.clamp(0.0, 1.0), 0.01, "one-sample uniform").unwrap();
        assert!(r.pass);
    }

    #[test]
    fn chi2_basic_behaviour() {
        let r = chi2_gof(&[240, 260, 500], &[0.25, 0.25, 0.5], 0.01, "fair").unwrap();
        assert!(r.pass);
        let r = chi2_gof(&[100, 400, 500], &[0.25, 0.25, 0.5], 0.01, "unfair").unwrap();
        assert!(!r.pass);
        assert!(chi2_gof(&[1, 2], &[0.5, 0.5], 0.01, "tiny").is_err());
    }

    #[test]
    fn trial_rng_streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut r = trial_rng(5, 0);
            (0..4).map(|_| r.gen()).collect()
        };
        let b: Vec<u64> = {
            let mut r = trial_rng(5, 0);
            (0..4).map(|_| r.gen()).collect()
        };
        let c: Vec<u64> = {
            let mut r = trial_rng(5, 1);
            (0..4).map(|_| r.gen()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn universality_small_smoke() {
        let reports = universality_test(
            &[PolicyId::Rdcs, PolicyId::Ldcs],
            &[0.3, 0.2],
            4000,
            2024,
            0.01,
        )
        .unwrap();
        assert!(reports.iter().all(|r| r.pass), "{reports:#?}");
    }

    #[test]
    fn invalid_policy_detected() {
        let reports = universality_test(
            &[PolicyId::Rdcs, PolicyId::InvalidSnap],
            &[0.3, 0.1, 0.2],
            4000,
            77,
            0.01,
        )
        .unwrap();
        assert!(
            reports.iter().any(|r| !r.pass),
            "negative control must fail"
        );
    }

    #[test]
    fn free_space_trajectories_differ() {
        let r = free_space_trajectory_test(
            PolicyId::Rdcs,
            PolicyId::PSplit(0.5),
            &[0.2, 0.2, 0.2],
            3000,
            99,
            0.01,
        )
        .unwrap();
        assert!(!r.pass, "free-space shrink statistics must differ: {r:?}");
    }

    #[test]
    fn occupied_trajectories_match() {
        let r = process_universality_test(
            PolicyId::Rdcs,
            PolicyId::PSplit(0.5),
            &[0.3, 0.1, 0.2],
            4000,
            4242,
            0.01,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn exhaustive_oracle_small() {
        let reports = exhaustive_discrete_oracle(
            5,
            &[1, 1],
            &[
                DiscretePolicy::Rdcs,
                DiscretePolicy::Ldcs,
                DiscretePolicy::Particle,
            ],
        )
        .unwrap();
        assert!(reports.iter().all(|r| r.pass), "{reports:#?}");
    }

    #[test]
    fn exhaustive_law_single_mass_uniform_start() {
        let law = exhaustive_discrete_law(6, &[2], DiscretePolicy::Rdcs).unwrap();
        assert_eq!(law.len(), 6);
        for p in law.values() {
            assert_eq!(*p, BigRational::new(BigInt::from(1), BigInt::from(6)));
        }
    }
}
