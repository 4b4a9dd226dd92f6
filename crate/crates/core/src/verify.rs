//! End-to-end verification suite: every distributional and asymptotic claim
//! the library is built around, run as concrete seeded experiments with
//! pinned tolerances.  `run_all` drives the thirteen checks; the `quick`
//! variant shrinks Monte Carlo sizes for a fast smoke pass.

use num_rational::Rational64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circle::OccupiedConfig;
use crate::cost::{time_at, InsertionMeasure};
use crate::discrete::{bulldozer_park, couple_discrete, park, DiscretePolicy};
use crate::excursion::{
    closed_form_mean_id, m_lambda_functional, polya_fluid_check, polya_mean_exact, sample_excursion,
};
use crate::laws::{
    block_length_law, compose_transitions, pmf_n_continuous, transition_n_continuous,
    transition_n_discrete,
};
use crate::path::CollectingPath;
use crate::policy::{relax, relax_directed, MassEvent, PolicyId};
use crate::stats::{
    chi2_gof, dirichlet_spacing_test, exhaustive_discrete_oracle, free_space_trajectory_test,
    trial_rng, universality_test, TestReport,
};
use crate::Result;

/// Master seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 0x00D1_5050_u64;

/// Allowance constant for the epsilon-truncated limit functionals: the mass
/// lost to sub-epsilon fragments is ~0.7 sqrt(eps), i.e. ~7 eps at the
/// pinned eps = 0.02.
pub const TRUNCATION_C: f64 = 7.0;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub reports: Vec<TestReport>,
}

impl CriterionResult {
    fn new(id: u32, name: &str, pass: bool, detail: String, reports: Vec<TestReport>) -> Self {
        CriterionResult {
            id,
            name: name.to_string(),
            pass,
            detail,
            reports,
        }
    }
}

/// Run the full suite (or the reduced smoke sizes) and return one result per
/// criterion.
pub fn run_all(master_seed: u64, quick: bool) -> Result<Vec<CriterionResult>> {
    Ok(vec![
        c1_binomial_universality(master_seed, quick)?,
        c2_dirichlet_spacings(master_seed, quick)?,
        c3_exact_discrete_oracle()?,
        c4_collecting_path_lemma(master_seed, quick)?,
        c5_block_law_cross_check(master_seed, quick)?,
        c6_phase_discrete(master_seed, quick)?,
        c7_phase_continuous_coupling(master_seed, quick)?,
        c8_cost_limit_mean(master_seed, quick)?,
        c9_m_lambda_consistency(master_seed, quick)?,
        c10_theta_convergence(master_seed, quick)?,
        c11_transition_checks(master_seed, quick)?,
        c12_polya_fluid(master_seed, quick)?,
        c13_negative_controls(master_seed, quick)?,
    ])
}

/// Print one line per criterion; returns overall pass.
pub fn print_results(results: &[CriterionResult]) -> bool {
    let mut all = true;
    for r in results {
        println!(
            "criterion {:>2} [{}] {} — {}",
            r.id,
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all &= r.pass;
    }
    all
}

const UNIVERSAL_POLICIES: [PolicyId; 5] = [
    PolicyId::Rdcs,
    PolicyId::PSplit(0.3),
    PolicyId::ClosestSide,
    PolicyId::FluidParticle,
    PolicyId::JamSpreader,
];

fn c1_binomial_universality(seed: u64, quick: bool) -> Result<CriterionResult> {
    let masses = [0.3, 0.1, 0.2];
    let trials = if quick { 20_000 } else { 100_000 };
    let expected = pmf_n_continuous(3, 0.6)?;
    let alpha = 0.01 / UNIVERSAL_POLICIES.len() as f64;
    let mut reports = Vec::new();
    for (pi, &policy) in UNIVERSAL_POLICIES.iter().enumerate() {
        let counts: Vec<u64> = {
            let per: Vec<usize> = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut rng = trial_rng(seed ^ 0xC1, (pi * trials + i) as u64);
                    let mut cfg = OccupiedConfig::new();
                    for &m in &masses {
                        let u: f64 = rng.gen();
                        let (next, _) =
                            relax(&cfg, MassEvent::new(u, m), policy, &mut rng).expect("relax");
                        cfg = next;
                    }
                    cfg.num_components()
                })
                .collect();
            let mut c = vec![0u64; 3];
            for n in per {
                c[n - 1] += 1;
            }
            c
        };
        reports.push(chi2_gof(
            &counts,
            &expected,
            alpha,
            &format!("{policy:?}: N_3 pmf"),
        )?);
    }
    let pass = reports.iter().all(|r| r.pass);
    let min_p = reports
        .iter()
        .map(|r| r.p_value.unwrap_or(1.0))
        .fold(1.0, f64::min);
    Ok(CriterionResult::new(
        1,
        "binomial block-count universality",
        pass,
        format!(
            "5 policies x {trials} trials vs pmf (0.36, 0.48, 0.16); min p = {min_p:.4} at alpha = {alpha:.4}"
        ),
        reports,
    ))
}

fn c2_dirichlet_spacings(seed: u64, quick: bool) -> Result<CriterionResult> {
    let masses = [0.3, 0.1, 0.2];
    let conditioned = if quick { 2_000 } else { 10_000 };
    let alpha = 0.01 / UNIVERSAL_POLICIES.len() as f64;
    let mut reports = Vec::new();
    for (pi, &policy) in UNIVERSAL_POLICIES.iter().enumerate() {
        reports.extend(dirichlet_spacing_test(
            policy,
            &masses,
            2,
            conditioned,
            seed ^ 0xC2,
            (pi as u64) << 32,
            alpha,
        )?);
    }
    let pass = reports.iter().all(|r| r.pass);
    let min_p = reports
        .iter()
        .map(|r| r.p_value.unwrap_or(1.0))
        .fold(1.0, f64::min);
    Ok(CriterionResult::new(
        2,
        "Dirichlet free spacings (b = 2)",
        pass,
        format!("5 policies, {conditioned} conditioned samples; min p = {min_p:.4}"),
        reports,
    ))
}

fn c3_exact_discrete_oracle() -> Result<CriterionResult> {
    let reports = exhaustive_discrete_oracle(
        6,
        &[2, 1],
        &[
            DiscretePolicy::Rdcs,
            DiscretePolicy::Ldcs,
            DiscretePolicy::Particle,
        ],
    )?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(CriterionResult::new(
        3,
        "exact grid oracle (n=6, masses 2/6 and 1/6)",
        pass,
        format!(
            "exhaustive 6^2 words, zero-tolerance law equality across RDCS/LDCS/particle + piling propensity; {} checks",
            reports.len()
        ),
        reports,
    ))
}

fn c4_collecting_path_lemma(seed: u64, quick: bool) -> Result<CriterionResult> {
    let instances = if quick { 200 } else { 1000 };
    let failures: usize = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0xC4, i as u64);
            let k = rng.gen_range(1..=50);
            let den: i64 = 1 << 16;
            let mut units: Vec<i64> = (0..k)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        0 // keep zero masses in the mix
                    } else {
                        rng.gen_range(0..=den / 64)
                    }
                })
                .collect();
            while units.iter().sum::<i64>() >= den {
                for u in units.iter_mut() {
                    *u /= 2;
                }
            }
            let events: Vec<MassEvent<Rational64>> = units
                .iter()
                .map(|&m| {
                    MassEvent::new(
                        Rational64::new(rng.gen_range(0..den), den),
                        Rational64::new(m, den),
                    )
                })
                .collect();
            let mut cfg: OccupiedConfig<Rational64> = OccupiedConfig::new();
            for e in &events {
                cfg = relax_directed(&cfg, *e, true).expect("rdcs");
            }
            let mut rdcs: Vec<Rational64> = cfg
                .components()
                .iter()
                .map(|c| c.length)
                .filter(|l| *l > Rational64::new(0, 1))
                .collect();
            rdcs.sort();
            let path = CollectingPath::build(&events).expect("path");
            usize::from(rdcs != path.excursion_lengths())
        })
        .sum();
    let pass = failures == 0;
    Ok(CriterionResult::new(
        4,
        "collecting-path excursion lemma",
        pass,
        format!("{instances} random rational instances (k <= 50): {failures} multiset mismatches"),
        vec![],
    ))
}

fn c5_block_law_cross_check(seed: u64, quick: bool) -> Result<CriterionResult> {
    let w = 0.1;
    let masses = [w, w, w];
    let trials: usize = if quick { 100_000 } else { 1_000_000 };
    // partition sums for the three achievable sorted-length profiles
    let p_single = block_length_law(&masses, &[3.0 * w])?;
    let p_mixed =
        block_length_law(&masses, &[w, 2.0 * w])? + block_length_law(&masses, &[2.0 * w, w])?;
    let p_triple = block_length_law(&masses, &[w, w, w])?;
    let expected = [p_single, p_mixed, p_triple];

    let counts: Vec<u64> = {
        let per: Vec<usize> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed ^ 0xC5, i as u64);
                let mut cfg = OccupiedConfig::new();
                for &m in &masses {
                    let u: f64 = rng.gen();
                    let (next, _) =
                        relax(&cfg, MassEvent::new(u, m), PolicyId::Rdcs, &mut rng).unwrap();
                    cfg = next;
                }
                cfg.num_components()
            })
            .collect();
        let mut c = vec![0u64; 3];
        for n in per {
            c[n - 1] += 1;
        }
        c
    };

    let mut pass = (expected.iter().sum::<f64>() - 1.0).abs() < 1e-10;
    let mut detail = String::new();
    for (i, (&c, &p)) in counts.iter().zip(&expected).enumerate() {
        let mean = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        let dev = (c as f64 - mean) / sigma;
        pass &= dev.abs() <= 3.0;
        detail.push_str(&format!("cell {}: {:+.2} sigma; ", i + 1, dev));
    }
    Ok(CriterionResult::new(
        5,
        "occupied block-length law vs Monte Carlo (k=3, w=0.1)",
        pass,
        format!(
            "{trials} trials; {detail}law mass {:.6}",
            expected.iter().sum::<f64>()
        ),
        vec![],
    ))
}

fn c6_phase_discrete(seed: u64, quick: bool) -> Result<CriterionResult> {
    let n: usize = if quick { 2_500 } else { 10_000 };
    let trials = if quick { 50 } else { 200 };
    let t = time_at(n, 1.0);
    let means: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0xC6, i as u64);
            let choices: Vec<usize> = (0..t).map(|_| rng.gen_range(0..n)).collect();
            let st = park(n, &choices).expect("park");
            st.num_blocks() as f64 / (n as f64).sqrt()
        })
        .collect();
    let mean = means.iter().sum::<f64>() / trials as f64;
    let pass = (0.60..=0.66).contains(&mean);
    Ok(CriterionResult::new(
        6,
        "discrete phase transition block count",
        pass,
        format!(
            "n={n}, lambda=1, {trials} trials: mean N/sqrt(n) = {mean:.4} (target 0.632, band [0.60, 0.66])"
        ),
        vec![],
    ))
}

fn c7_phase_continuous_coupling(seed: u64, quick: bool) -> Result<CriterionResult> {
    let n: usize = if quick { 2_500 } else { 10_000 };
    let trials = if quick { 50 } else { 200 };
    let t = time_at(n, 1.0);
    let results: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0xC7, i as u64);
            let arrivals: Vec<f64> = (0..t).map(|_| rng.gen()).collect();
            let cont = bulldozer_park(n as u64, &arrivals).expect("bulldozer");
            let slots = couple_discrete(&arrivals, n as u64);
            let choices: Vec<usize> = slots.iter().map(|&s| s as usize).collect();
            let disc = park(n, &choices).expect("park");

            let scaled_n = cont.num_components() as f64 / (n as f64).sqrt();

            let mut top_cont: Vec<f64> = cont.components().iter().map(|c| c.length).collect();
            top_cont.sort_by(|a, b| b.partial_cmp(a).unwrap());
            top_cont.resize(3.max(top_cont.len()), 0.0);
            let mut top_disc: Vec<f64> = disc
                .runs()
                .iter()
                .map(|&(_, l)| l as f64 / n as f64)
                .collect();
            top_disc.sort_by(|a, b| b.partial_cmp(a).unwrap());
            top_disc.resize(3.max(top_disc.len()), 0.0);

            let max_diff = (0..3)
                .map(|r| (top_cont[r] - top_disc[r]).abs())
                .fold(0.0, f64::max);
            (scaled_n, max_diff)
        })
        .collect();
    let mean = results.iter().map(|r| r.0).sum::<f64>() / trials as f64;
    let mean_pass = (0.95..=1.05).contains(&mean);
    let tol = 2.0 / n as f64 + 1e-9;
    let coupling_fails = results.iter().filter(|r| r.1 > tol).count();
    let mut diffs: Vec<f64> = results.iter().map(|r| r.1 * n as f64).collect();
    diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_cells = diffs[trials / 2];
    // Known red: the grid model merges across sub-cell gaps that the
    // continuous model keeps open, so the two have structurally different
    // block counts (0.632 vs 1 per sqrt(n), as their own limits require)
    // and the top blocks absorb different micro-neighbours.  A per-trial
    // 2/n agreement cannot coexist with that; the observed gap is tens of
    // cells.  The bound is asserted as stated rather than loosened.
    let pass = mean_pass && coupling_fails == 0;
    Ok(CriterionResult::new(
        7,
        "continuous phase transition + per-trial coupling",
        pass,
        format!(
            "mean N/sqrt(n) = {mean:.4} (band [0.95, 1.05]: {}); top-3 coupling at 2/n: {coupling_fails}/{trials} violations, median gap {median_cells:.0} cells",
            if mean_pass { "pass" } else { "FAIL" }
        ),
        vec![],
    ))
}

fn c8_cost_limit_mean(seed: u64, quick: bool) -> Result<CriterionResult> {
    let n: usize = if quick { 20_000 } else { 40_000 };
    let trials = if quick { 100 } else { 500 };
    let scaled: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0xC8, i as u64);
            let choices: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let st = park(n, &choices).expect("park");
            st.cost() as f64 / (n as f64).powf(1.5)
        })
        .collect();
    let mean = scaled.iter().sum::<f64>() / trials as f64;
    let target = (std::f64::consts::PI / 8.0).sqrt();
    let rel = (mean - target).abs() / target;
    let pass = rel <= 0.05;
    Ok(CriterionResult::new(
        8,
        "full-table displacement cost limit",
        pass,
        format!(
            "n={n}, {trials} trials: mean Cost/n^1.5 = {mean:.5} vs sqrt(pi/8) = {target:.5} ({:.2}% off)",
            rel * 100.0
        ),
        vec![],
    ))
}

fn c9_m_lambda_consistency(seed: u64, quick: bool) -> Result<CriterionResult> {
    let grid = if quick { 1 << 12 } else { 1 << 14 };
    let samples = if quick { 300 } else { 2000 };
    let eps = 0.02;
    let mut pass = true;
    let mut detail = String::new();
    for (li, lambda) in [0.5, 1.0].into_iter().enumerate() {
        let vals: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed ^ 0xC9, ((li * samples) + i) as u64);
                let e = sample_excursion(grid, &mut rng).expect("excursion");
                m_lambda_functional(&e, lambda, eps, |x| x, 512).expect("functional")
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / samples as f64;
        let closed = closed_form_mean_id(lambda);
        let allowance = 0.05 * closed + TRUNCATION_C * eps;
        let ok = (mean - closed).abs() <= allowance;
        pass &= ok;
        detail.push_str(&format!(
            "lambda={lambda}: MC {mean:.4} vs closed {closed:.4} (allowance {allowance:.4}); "
        ));
    }
    Ok(CriterionResult::new(
        9,
        "limit-measure functional vs closed form",
        pass,
        format!("{samples} samples at N={grid}, eps={eps}: {detail}"),
        vec![],
    ))
}

fn c10_theta_convergence(seed: u64, quick: bool) -> Result<CriterionResult> {
    let n: usize = if quick { 2_500 } else { 10_000 };
    let runs = if quick { 50 } else { 200 };
    let lambda = 1.0;
    let eps = 0.05;
    let t = time_at(n, lambda);
    // parking side
    let theta_vals: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0x10A, i as u64);
            let choices: Vec<usize> = (0..t).map(|_| rng.gen_range(0..n)).collect();
            let st = park(n, &choices).expect("park");
            let mes = InsertionMeasure::from_state(&st);
            mes.theta_functional(|x| if x >= eps { x } else { 0.0 })
        })
        .collect();
    let theta_mean = theta_vals.iter().sum::<f64>() / runs as f64;
    // excursion side with the same test function
    let ex_samples = if quick { 100 } else { 400 };
    let ex_vals: Vec<f64> = (0..ex_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0x10B, i as u64);
            let e = sample_excursion(1 << 14, &mut rng).expect("excursion");
            m_lambda_functional(&e, lambda, eps, |x| x, 512).expect("functional")
        })
        .collect();
    let ex_mean = ex_vals.iter().sum::<f64>() / ex_samples as f64;
    let rel = (theta_mean - ex_mean).abs() / ex_mean;
    let pass = rel <= 0.10;
    Ok(CriterionResult::new(
        10,
        "insertion measure converges to the limit measure",
        pass,
        format!(
            "n={n}: <1_[{eps},1] Id, Theta> = {theta_mean:.4} vs excursion estimate {ex_mean:.4} ({:.2}% apart)",
            rel * 100.0
        ),
        vec![],
    ))
}

fn c11_transition_checks(seed: u64, quick: bool) -> Result<CriterionResult> {
    // Chapman-Kolmogorov against the binomial law, k <= 6
    let mut ck_err: f64 = 0.0;
    for masses in [
        vec![0.1, 0.2, 0.05, 0.15, 0.1, 0.05],
        vec![0.3, 0.0, 0.2, 0.1],
        vec![0.08; 6],
    ] {
        let w: f64 = masses.iter().sum();
        let composed = compose_transitions(&masses)?;
        let direct = pmf_n_continuous(masses.len() as u32, w)?;
        for (a, b) in composed.iter().zip(&direct) {
            ck_err = ck_err.max((a - b).abs());
        }
    }
    let ck_pass = ck_err < 1e-10;

    // simulated one-step transitions, continuous
    let trials = if quick { 30_000 } else { 150_000 };
    let prefix = [0.2, 0.1, 0.1];
    let m_next = 0.15;
    let w: f64 = prefix.iter().sum();
    let sims: Vec<(usize, usize)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0xC11, i as u64);
            let mut cfg = OccupiedConfig::new();
            for &m in &prefix {
                let u: f64 = rng.gen();
                let (next, _) =
                    relax(&cfg, MassEvent::new(u, m), PolicyId::Rdcs, &mut rng).unwrap();
                cfg = next;
            }
            let before = cfg.num_components();
            let u: f64 = rng.gen();
            let (after, _) =
                relax(&cfg, MassEvent::new(u, m_next), PolicyId::Rdcs, &mut rng).unwrap();
            (before, after.num_components())
        })
        .collect();
    let mut reports = Vec::new();
    for b in 1..=3usize {
        let row: Vec<usize> = sims.iter().filter(|s| s.0 == b).map(|s| s.1).collect();
        if row.len() < 2000 {
            continue;
        }
        let mut counts = vec![0u64; b + 1];
        for &to in &row {
            counts[to - 1] += 1;
        }
        let probs = transition_n_continuous(b as u32, w, m_next)?;
        reports.push(chi2_gof(
            &counts,
            &probs,
            0.01 / 6.0,
            &format!("continuous one-step from N={b}"),
        )?);
    }

    // simulated one-step transitions, grid
    let n_grid = 24u64;
    let prefix_units = [4u64, 2, 2];
    let next_units = 3u64;
    let mass_units: u64 = prefix_units.iter().sum();
    let sims: Vec<(usize, usize)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed ^ 0xD11, i as u64);
            let mut cfg = crate::discrete::DiscreteConfig::new(n_grid);
            for &m in &prefix_units {
                let u = rng.gen_range(0..n_grid);
                cfg = crate::discrete::discrete_relax(&cfg, u, m, DiscretePolicy::Rdcs, &mut rng)
                    .unwrap();
            }
            let before = cfg.occupied().num_components();
            let u = rng.gen_range(0..n_grid);
            let after = crate::discrete::discrete_relax(
                &cfg,
                u,
                next_units,
                DiscretePolicy::Rdcs,
                &mut rng,
            )
            .unwrap();
            (before, after.occupied().num_components())
        })
        .collect();
    for b in 1..=3usize {
        let row: Vec<usize> = sims.iter().filter(|s| s.0 == b).map(|s| s.1).collect();
        if row.len() < 2000 {
            continue;
        }
        let mut counts = vec![0u64; b + 1];
        for &to in &row {
            counts[to - 1] += 1;
        }
        let probs = transition_n_discrete(b as u32, mass_units, n_grid, next_units)?;
        reports.push(chi2_gof(
            &counts,
            &probs,
            0.01 / 6.0,
            &format!("grid one-step from N={b}"),
        )?);
    }

    let sim_pass = reports.iter().all(|r| r.pass);
    let pass = ck_pass && sim_pass && reports.len() >= 4;
    Ok(CriterionResult::new(
        11,
        "transition-matrix checks",
        pass,
        format!(
            "Chapman-Kolmogorov max err {ck_err:.2e}; {} simulated rows, all chi2 {}",
            reports.len(),
            if sim_pass { "pass" } else { "FAIL" }
        ),
        reports,
    ))
}

fn c12_polya_fluid(seed: u64, quick: bool) -> Result<CriterionResult> {
    let m_scale = if quick { 20_000 } else { 100_000 };
    let mut rng = trial_rng(seed ^ 0xC12, 0);
    let chk = polya_fluid_check(1.0, 0.5, m_scale, 2.0, &mut rng)?;
    let sup_pass = chk.sup_error < 1e-2;

    // exact mean recursion vs Monte Carlo at M = 10
    let (a0, b0, t) = (10u64, 5u64, 20u64);
    let want = polya_mean_exact(a0, b0, t);
    let trials = if quick { 20_000 } else { 100_000 };
    let sums: (f64, f64) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = trial_rng(seed ^ 0xD12, i as u64);
            let (mut a, mut b) = (a0, b0);
            for _ in 0..t {
                if r.gen_range(0..(a + b)) < a {
                    b += 1;
                } else {
                    a += 1;
                }
            }
            (b as f64, (b * b) as f64)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    let mean = sums.0 / trials as f64;
    let var = sums.1 / trials as f64 - mean * mean;
    let se = (var / trials as f64).sqrt();
    let mean_pass = (mean - want).abs() <= 3.0 * se;
    let pass = sup_pass && mean_pass;
    Ok(CriterionResult::new(
        12,
        "urn fluid limit",
        pass,
        format!(
            "sup error {:.5} (< 0.01); mean recursion {want:.4} vs MC {mean:.4} ({:+.2} sigma)",
            chk.sup_error,
            (mean - want) / se
        ),
        vec![],
    ))
}

fn c13_negative_controls(seed: u64, quick: bool) -> Result<CriterionResult> {
    let trials = if quick { 4_000 } else { 10_000 };
    let invalid = universality_test(
        &[PolicyId::Rdcs, PolicyId::InvalidSnap],
        &[0.3, 0.1, 0.2],
        trials,
        seed ^ 0xC13,
        0.01,
    )?;
    let invalid_detected = invalid.iter().any(|r| !r.pass);
    let free = free_space_trajectory_test(
        PolicyId::Rdcs,
        PolicyId::PSplit(0.5),
        &[0.2, 0.2, 0.2],
        trials,
        seed ^ 0xD13,
        0.01,
    )?;
    let free_detected = !free.pass;
    let pass = invalid_detected && free_detected;
    let mut reports = invalid;
    reports.push(free);
    Ok(CriterionResult::new(
        13,
        "negative controls report failures",
        pass,
        format!(
            "rotation-breaking policy detected: {invalid_detected}; free-space trajectory difference detected: {free_detected}"
        ),
        reports,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    // the full-size run lives in tests/acceptance.rs; here only the cheap
    // deterministic criteria
    #[test]
    fn oracle_criterion_passes() {
        let r = c3_exact_discrete_oracle().unwrap();
        assert!(r.pass, "{:#?}", r);
    }

    #[test]
    fn ck_and_transition_rows() {
        let r = c11_transition_checks(DEFAULT_SEED, true).unwrap();
        assert!(r.pass, "{:#?}", r);
    }
}
