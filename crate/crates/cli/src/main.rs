//! Command-line driver: simulate dispersions, verify the distributional
//! claims, and run the cost / phase-transition / limit-functional
//! experiments, all reproducible from a master seed.

mod config;
mod output;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use dispersal_core::circle::OccupiedConfig;
use dispersal_core::cost::{scaled_cost_trial, time_at, InsertionMeasure};
use dispersal_core::discrete::{bulldozer_park, couple_discrete, park};
use dispersal_core::excursion::{
    closed_form_mean_id, closed_form_mean_power, m_lambda_functional, sample_excursion,
};
use dispersal_core::policy::{relax, MassEvent, MassVector};
use dispersal_core::stats::{trial_rng, TrialPlan};
use dispersal_core::verify;
use rand::Rng;

use config::{parse_policy, MassSpec, PolicyConfig};
use output::{fmt_f64, CsvWriter};

#[derive(Parser)]
#[command(name = "dispersallab", version, about = "circle dispersion simulators")]
struct Cli {
    /// Master seed (fallback: DISPERSALLAB_SEED, then a built-in default).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// JSON config file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Disperse a mass sequence under a policy and write summaries.
    Simulate(SimulateArgs),
    /// Run the verification suite and write a report bundle.
    Verify(VerifyArgs),
    /// Parking-cost experiment at the critical time.
    Cost(CostArgs),
    /// Discrete vs continuous phase-transition experiment.
    Phase(PhaseArgs),
    /// Excursion limit functionals and closed forms.
    Limits(LimitsArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Policy name: rdcs, ldcs, psplit, random-dir, closest-side,
    /// closest-side-reeval, fluid, brownian-range, jam-spreader.
    #[arg(long, default_value = "rdcs")]
    policy: String,
    /// Split / direction probability for psplit and random-dir.
    #[arg(long)]
    p: Option<f64>,
    /// Spatial step for brownian-range.
    #[arg(long)]
    h: Option<f64>,
    /// Explicit masses, comma separated (e.g. 0.3,0.1,0.2).
    #[arg(long, value_delimiter = ',')]
    masses: Vec<f64>,
    /// Equal masses: "w,k" lays k masses of size w.
    #[arg(long)]
    equal: Option<String>,
    /// IID uniform masses: "max,k" draws k masses from U(0, max), capped so
    /// the total stays below the cap (0.95).
    #[arg(long)]
    iid: Option<String>,
    /// Run on the grid C_n instead of the continuum; masses must be
    /// multiples of 1/n and the policy one of rdcs, ldcs, particle.
    #[arg(long)]
    grid_n: Option<u64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Also dump final configurations as JSON.
    #[arg(long)]
    dump_configs: bool,
    /// Also dump the collecting path of the first trial as CSV.
    #[arg(long)]
    dump_path: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Reduced Monte Carlo sizes (smoke run).
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// standard | closest | pwalk | symwalk
    #[arg(long, default_value = "standard")]
    model: String,
    /// Bias for pwalk.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Comma-separated lambda grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0])]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// How many largest blocks to record per trial.
    #[arg(long, default_value_t = 3)]
    top: usize,
}

#[derive(Args)]
struct LimitsArgs {
    /// Comma-separated tilt values.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.5, 1.0])]
    lambdas: Vec<f64>,
    /// Excursion grid size.
    #[arg(long, default_value_t = 16_384)]
    grid: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Lower support cut of the test function.
    #[arg(long, default_value_t = 0.02)]
    eps: f64,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn resolve_seed(cli_seed: Option<u64>) -> u64 {
    cli_seed
        .or_else(|| {
            std::env::var("DISPERSALLAB_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(verify::DEFAULT_SEED)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("thread pool")?;
    }
    let seed = resolve_seed(cli.seed);
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output dir {:?}", cli.out))?;
    let file_cfg = cli
        .config
        .as_ref()
        .map(|p| config::load(p))
        .transpose()?
        .unwrap_or_default();

    match cli.command {
        Command::Simulate(args) => cmd_simulate(args, file_cfg, seed, &cli.out),
        Command::Verify(args) => cmd_verify(args, seed, &cli.out),
        Command::Cost(args) => cmd_cost(args, file_cfg, seed, &cli.out),
        Command::Phase(args) => cmd_phase(args, seed, &cli.out),
        Command::Limits(args) => cmd_limits(args, seed, &cli.out),
    }
}

fn cmd_simulate(args: SimulateArgs, file_cfg: PolicyConfig, seed: u64, out: &Path) -> Result<()> {
    if let Some(n) = args.grid_n {
        return cmd_simulate_grid(&args, n, seed, out);
    }
    let policy = parse_policy(&args.policy, args.p, args.h, &file_cfg)?;
    let mass_spec = MassSpec::resolve(&args.masses, &args.equal, &args.iid)?;
    let plan = TrialPlan::new(seed, args.trials);
    let trials = plan.trials;
    let header = serde_json::json!({
        "subcommand": "simulate",
        "policy": config::policy_json(policy),
        "masses": mass_spec,
        "plan": plan,
        "seed": seed,
    });

    let runs: Vec<(Vec<f64>, OccupiedConfig<f64>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = plan.rng(i as u64);
            let masses = mass_spec.draw(&mut rng);
            MassVector::new(masses.clone()).expect("validated masses");
            let mut cfg = OccupiedConfig::new();
            for &m in &masses {
                let u: f64 = rng.gen();
                let (next, _) = relax(&cfg, MassEvent::new(u, m), policy, &mut rng)
                    .expect("mass spec keeps totals below 1");
                cfg = next;
            }
            (masses, cfg)
        })
        .collect();

    let mut csv = CsvWriter::create(out.join("summary.csv"), &header)?;
    csv.row_header(&[
        "trial",
        "k",
        "total_mass",
        "n_blocks",
        "largest",
        "smallest",
        "shift",
    ])?;
    for (i, (masses, cfg)) in runs.iter().enumerate() {
        let lengths = cfg.sorted_lengths();
        let lab = cfg.label_blocks();
        csv.row(&[
            i.to_string(),
            masses.len().to_string(),
            fmt_f64(cfg.total_measure()),
            cfg.num_components().to_string(),
            fmt_f64(lengths.last().copied().unwrap_or(0.0)),
            fmt_f64(lengths.first().copied().unwrap_or(0.0)),
            lab.map(|l| fmt_f64(l.shift)).unwrap_or_default(),
        ])?;
    }
    csv.finish()?;

    if args.dump_configs {
        let configs: Vec<&OccupiedConfig<f64>> = runs.iter().map(|r| &r.1).collect();
        let doc = serde_json::json!({ "config": header, "finals": configs });
        std::fs::write(
            out.join("configs.json"),
            serde_json::to_string_pretty(&doc)?,
        )?;
    }
    if args.dump_path {
        let mut rng = trial_rng(seed, 0);
        let masses = mass_spec.draw(&mut rng);
        let events: Vec<MassEvent<f64>> = masses
            .iter()
            .map(|&m| {
                let u: f64 = rng.gen();
                MassEvent::new(u, m)
            })
            .collect();
        let path = dispersal_core::path::CollectingPath::build(&events)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let mut csv = CsvWriter::create(out.join("path.csv"), &header)?;
        csv.row_header(&["x", "s_left", "s"])?;
        for (x, sl, s) in path.points() {
            csv.row(&[fmt_f64(x), fmt_f64(sl), fmt_f64(s)])?;
        }
        csv.finish()?;
    }
    println!("simulate: wrote {:?}", out.join("summary.csv"));
    Ok(())
}

fn cmd_simulate_grid(args: &SimulateArgs, n: u64, seed: u64, out: &Path) -> Result<()> {
    use dispersal_core::discrete::{discrete_relax, DiscreteConfig, DiscretePolicy};
    let policy = match args.policy.as_str() {
        "rdcs" => DiscretePolicy::Rdcs,
        "ldcs" => DiscretePolicy::Ldcs,
        "particle" => DiscretePolicy::Particle,
        other => bail!("grid mode supports rdcs|ldcs|particle, got {other:?}"),
    };
    if args.masses.is_empty() {
        bail!("grid mode needs explicit --masses (multiples of 1/n)");
    }
    let units: Vec<u64> = args
        .masses
        .iter()
        .map(|&m| {
            let u = (m * n as f64).round();
            if ((u / n as f64) - m).abs() > 1e-9 || m < 0.0 {
                bail!("mass {m} is not a multiple of 1/{n}")
            } else {
                Ok(u as u64)
            }
        })
        .collect::<Result<_>>()?;
    if units.iter().sum::<u64>() >= n {
        bail!("total mass must stay below 1");
    }
    let plan = TrialPlan::new(seed, args.trials);
    let header = serde_json::json!({
        "subcommand": "simulate",
        "grid_n": n,
        "policy": args.policy,
        "mass_units": units,
        "plan": plan,
        "seed": seed,
    });
    let runs: Vec<DiscreteConfig> = (0..plan.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = plan.rng(i as u64);
            let mut cfg = DiscreteConfig::new(n);
            for &m in &units {
                let u = rng.gen_range(0..n);
                cfg = discrete_relax(&cfg, u, m, policy, &mut rng).expect("validated grid masses");
            }
            cfg
        })
        .collect();
    let mut csv = CsvWriter::create(out.join("summary.csv"), &header)?;
    csv.row_header(&["trial", "k", "total_units", "n_blocks", "blocks"])?;
    for (i, cfg) in runs.iter().enumerate() {
        let key = cfg.key();
        csv.row(&[
            i.to_string(),
            units.len().to_string(),
            cfg.total_units().to_string(),
            key.len().to_string(),
            key.iter()
                .map(|(s, l)| format!("{s}+{l}"))
                .collect::<Vec<_>>()
                .join(";"),
        ])?;
    }
    csv.finish()?;
    println!("simulate (grid): wrote {:?}", out.join("summary.csv"));
    Ok(())
}

fn cmd_verify(args: VerifyArgs, seed: u64, out: &Path) -> Result<()> {
    let results = verify::run_all(seed, args.quick)?;
    let all_pass = verify::print_results(&results);
    let law_tables = law_tables().map_err(|e| anyhow::anyhow!("{e}"))?;
    let doc = serde_json::json!({
        "config": { "subcommand": "verify", "quick": args.quick, "seed": seed },
        "criteria": results,
        "law_tables": law_tables,
        "all_pass": all_pass,
    });
    let path = out.join("report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
    println!("verify: wrote {path:?}");
    if !all_pass {
        bail!("verification suite reported failures");
    }
    Ok(())
}

fn cmd_cost(args: CostArgs, file_cfg: PolicyConfig, seed: u64, out: &Path) -> Result<()> {
    let model = config::parse_cost_model(&args.model, args.p.or(file_cfg.p))?;
    let header = serde_json::json!({
        "subcommand": "cost",
        "n": args.n,
        "lambda": args.lambda,
        "model": format!("{model:?}"),
        "trials": args.trials,
        "seed": seed,
    });
    let rows: Vec<(f64, f64)> = (0..args.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            scaled_cost_trial(args.n, args.lambda, model, &mut rng).expect("cost trial")
        })
        .collect();
    let mut csv = CsvWriter::create(out.join("results.csv"), &header)?;
    csv.row_header(&["trial", "cost", "scaled_cost"])?;
    for (i, (cost, scaled)) in rows.iter().enumerate() {
        csv.row(&[i.to_string(), fmt_f64(*cost), fmt_f64(*scaled)])?;
    }
    csv.finish()?;
    let mean = rows.iter().map(|r| r.1).sum::<f64>() / rows.len().max(1) as f64;
    println!(
        "cost: {} trials, mean scaled cost {:.5}; wrote {:?}",
        args.trials,
        mean,
        out.join("results.csv")
    );
    Ok(())
}

fn cmd_phase(args: PhaseArgs, seed: u64, out: &Path) -> Result<()> {
    let header = serde_json::json!({
        "subcommand": "phase",
        "n": args.n,
        "lambdas": args.lambdas,
        "trials": args.trials,
        "seed": seed,
    });
    let mut csv = CsvWriter::create(out.join("phase.csv"), &header)?;
    let mut cols = vec![
        "trial".to_string(),
        "lambda".to_string(),
        "n".to_string(),
        "t".to_string(),
        "disc_blocks_scaled".to_string(),
        "cont_blocks_scaled".to_string(),
        "cost".to_string(),
    ];
    for r in 0..args.top {
        cols.push(format!("disc_top{}", r + 1));
        cols.push(format!("cont_top{}", r + 1));
    }
    csv.row_header(&cols.iter().map(|s| s.as_str()).collect::<Vec<_>>())?;

    for (li, &lambda) in args.lambdas.iter().enumerate() {
        let t = time_at(args.n, lambda);
        let rows: Vec<Vec<String>> = (0..args.trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed ^ (li as u64) << 48, i as u64);
                let arrivals: Vec<f64> = (0..t).map(|_| rng.gen()).collect();
                let cont = bulldozer_park(args.n as u64, &arrivals).expect("bulldozer");
                let slots = couple_discrete(&arrivals, args.n as u64);
                let choices: Vec<usize> = slots.iter().map(|&s| s as usize).collect();
                let disc = park(args.n, &choices).expect("park");

                let sqrt_n = (args.n as f64).sqrt();
                let mut row = vec![
                    i.to_string(),
                    fmt_f64(lambda),
                    args.n.to_string(),
                    t.to_string(),
                    fmt_f64(disc.num_blocks() as f64 / sqrt_n),
                    fmt_f64(cont.num_components() as f64 / sqrt_n),
                    disc.cost().to_string(),
                ];
                let mut dt: Vec<f64> = disc
                    .runs()
                    .iter()
                    .map(|&(_, l)| l as f64 / args.n as f64)
                    .collect();
                dt.sort_by(|a, b| b.partial_cmp(a).unwrap());
                dt.resize(args.top.max(dt.len()), 0.0);
                let mut ct: Vec<f64> = cont.components().iter().map(|c| c.length).collect();
                ct.sort_by(|a, b| b.partial_cmp(a).unwrap());
                ct.resize(args.top.max(ct.len()), 0.0);
                for r in 0..args.top {
                    row.push(fmt_f64(dt[r]));
                    row.push(fmt_f64(ct[r]));
                }
                row
            })
            .collect();
        for row in rows {
            csv.row(&row)?;
        }
    }
    csv.finish()?;
    println!("phase: wrote {:?}", out.join("phase.csv"));
    Ok(())
}

fn cmd_limits(args: LimitsArgs, seed: u64, out: &Path) -> Result<()> {
    let header = serde_json::json!({
        "subcommand": "limits",
        "lambdas": args.lambdas,
        "grid": args.grid,
        "samples": args.samples,
        "eps": args.eps,
        "seed": seed,
    });
    let mut csv = CsvWriter::create(out.join("limits.csv"), &header)?;
    csv.row_header(&["sample", "lambda", "functional_id"])?;
    let mut closed = Vec::new();
    for (li, &lambda) in args.lambdas.iter().enumerate() {
        let vals: Vec<f64> = (0..args.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed ^ (li as u64) << 48, i as u64);
                let e = sample_excursion(args.grid, &mut rng).expect("excursion");
                m_lambda_functional(&e, lambda, args.eps, |x| x, 512).expect("functional")
            })
            .collect();
        for (i, v) in vals.iter().enumerate() {
            csv.row(&[i.to_string(), fmt_f64(lambda), fmt_f64(*v)])?;
        }
        closed.push(serde_json::json!({
            "lambda": lambda,
            "mean_id": closed_form_mean_id(lambda),
            "mean_x2": closed_form_mean_power(2, lambda).expect("quadrature"),
            "mc_mean_id_truncated": vals.iter().sum::<f64>() / vals.len().max(1) as f64,
        }));
    }
    csv.finish()?;
    let doc = serde_json::json!({ "config": header, "closed_forms": closed });
    std::fs::write(out.join("limits.json"), serde_json::to_string_pretty(&doc)?)?;
    println!("limits: wrote {:?} and limits.json", out.join("limits.csv"));
    Ok(())
}

/// Reference law tables echoed into the verify report.
fn law_tables() -> dispersal_core::Result<serde_json::Value> {
    use dispersal_core::laws;
    let masses = [0.3_f64, 0.1, 0.2];
    let w: f64 = masses.iter().sum();
    Ok(serde_json::json!({
        "pmf_n_continuous": { "k": 3, "total_mass": w, "pmf": laws::pmf_n_continuous(3, w)? },
        "piling": { "continuous": laws::piling_q(3, w), "discrete_n6": laws::piling_q_discrete(3, 0.5, 6) },
        "transition_row": {
            "from_blocks": 2, "total_mass": 0.4, "next_mass": 0.15,
            "probs": laws::transition_n_continuous(2, 0.4, 0.15)?,
        },
        "pmf_n_discrete": { "k": 3, "mass_units": 3, "n": 6, "pmf": laws::pmf_n_discrete(3, 0.5, 6)? },
    }))
}

/// One-shot insertion-measure summary (exposed for ad hoc inspection).
#[allow(dead_code)]
fn theta_summary(n: usize, lambda: f64, seed: u64) -> f64 {
    let t = time_at(n, lambda);
    let mut rng = trial_rng(seed, 0);
    let choices: Vec<usize> = (0..t).map(|_| rng.gen_range(0..n)).collect();
    let st = park(n, &choices).expect("park");
    InsertionMeasure::from_state(&st).theta_functional(|x| x)
}
