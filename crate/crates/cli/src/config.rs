//! JSON run configuration and policy / mass-spec parsing.

use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

use dispersal_core::cost::CostModel;
use dispersal_core::policy::PolicyId;

/// Policy fields accepted from a JSON config file:
/// `{"policy": "psplit", "p": 0.5, "h": 0.001}`.
#[derive(Debug, Default, Clone, Deserialize)]
pub struct PolicyConfig {
    pub policy: Option<String>,
    pub p: Option<f64>,
    pub h: Option<f64>,
}

pub fn load(path: &Path) -> Result<PolicyConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {path:?}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {path:?}"))
}

/// Resolve a policy from the CLI name plus optional parameters, falling back
/// to config-file fields.
pub fn parse_policy(
    name: &str,
    p: Option<f64>,
    h: Option<f64>,
    file: &PolicyConfig,
) -> Result<PolicyId> {
    let name = if name.is_empty() {
        file.policy.clone().unwrap_or_else(|| "rdcs".into())
    } else {
        name.to_string()
    };
    let p = p.or(file.p);
    let h = h.or(file.h);
    let policy = match name.as_str() {
        "rdcs" => PolicyId::Rdcs,
        "ldcs" => PolicyId::Ldcs,
        "psplit" => PolicyId::PSplit(p.unwrap_or(0.5)),
        "random-dir" | "random_dir" => PolicyId::RandomDir(p.unwrap_or(0.5)),
        "closest-side" | "closest_side" => PolicyId::ClosestSide,
        "closest-side-reeval" | "closest_side_reeval" => PolicyId::ClosestSideReeval,
        "fluid" | "fluid-particle" => PolicyId::FluidParticle,
        "brownian-range" | "brownian_range" => PolicyId::BrownianRange(h.unwrap_or(1e-3)),
        "jam-spreader" | "jam_spreader" => PolicyId::JamSpreader,
        "invalid-snap" => PolicyId::InvalidSnap,
        other => bail!("unknown policy {other:?}"),
    };
    policy.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(policy)
}

pub fn policy_json(policy: PolicyId) -> serde_json::Value {
    match policy {
        PolicyId::Rdcs => serde_json::json!({"policy": "rdcs"}),
        PolicyId::Ldcs => serde_json::json!({"policy": "ldcs"}),
        PolicyId::PSplit(p) => serde_json::json!({"policy": "psplit", "p": p}),
        PolicyId::RandomDir(p) => serde_json::json!({"policy": "random-dir", "p": p}),
        PolicyId::ClosestSide => serde_json::json!({"policy": "closest-side"}),
        PolicyId::ClosestSideReeval => serde_json::json!({"policy": "closest-side-reeval"}),
        PolicyId::FluidParticle => serde_json::json!({"policy": "fluid"}),
        PolicyId::BrownianRange(h) => serde_json::json!({"policy": "brownian-range", "h": h}),
        PolicyId::JamSpreader => serde_json::json!({"policy": "jam-spreader"}),
        PolicyId::InvalidSnap => serde_json::json!({"policy": "invalid-snap"}),
    }
}

pub fn parse_cost_model(name: &str, p: Option<f64>) -> Result<CostModel> {
    let model = match name {
        "standard" | "standard-parking" => CostModel::StandardParking,
        "closest" | "closest-place" => CostModel::ClosestPlace,
        "pwalk" => CostModel::PWalk(p.unwrap_or(0.75)),
        "symwalk" | "symmetric-walk" => CostModel::SymmetricWalk,
        other => bail!("unknown cost model {other:?}"),
    };
    model.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(model)
}

/// Mass specification: explicit list, equal masses, or iid uniform draws
/// capped below 1.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MassSpec {
    Explicit(Vec<f64>),
    Equal { w: f64, k: usize },
    IidUniform { max: f64, k: usize, cap: f64 },
}

impl MassSpec {
    pub fn resolve(masses: &[f64], equal: &Option<String>, iid: &Option<String>) -> Result<Self> {
        let spec = if !masses.is_empty() {
            MassSpec::Explicit(masses.to_vec())
        } else if let Some(eq) = equal {
            let (w, k) = parse_pair(eq).context("--equal expects \"w,k\"")?;
            MassSpec::Equal { w, k: k as usize }
        } else if let Some(spec) = iid {
            let (max, k) = parse_pair(spec).context("--iid expects \"max,k\"")?;
            MassSpec::IidUniform {
                max,
                k: k as usize,
                cap: 0.95,
            }
        } else {
            MassSpec::Equal { w: 0.1, k: 3 }
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        match self {
            MassSpec::Explicit(m) => {
                if m.iter().any(|&x| x < 0.0) {
                    bail!("masses must be non-negative");
                }
                let total: f64 = m.iter().sum();
                if total >= 1.0 {
                    bail!("total mass {total} must stay below 1");
                }
            }
            MassSpec::Equal { w, k } => {
                if *w < 0.0 || *w * *k as f64 >= 1.0 {
                    bail!("equal masses must satisfy w*k < 1");
                }
            }
            MassSpec::IidUniform { max, cap, .. } => {
                if *max <= 0.0 || *cap >= 1.0 {
                    bail!("iid masses need max > 0 and cap < 1");
                }
            }
        }
        Ok(())
    }

    /// Draw the per-trial mass list (deterministic for explicit/equal).
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            MassSpec::Explicit(m) => m.clone(),
            MassSpec::Equal { w, k } => vec![*w; *k],
            MassSpec::IidUniform { max, k, cap } => {
                let mut out = Vec::with_capacity(*k);
                let mut total = 0.0;
                for _ in 0..*k {
                    let m = rng.gen::<f64>() * max;
                    if total + m >= *cap {
                        break;
                    }
                    total += m;
                    out.push(m);
                }
                out
            }
        }
    }
}

fn parse_pair(s: &str) -> Result<(f64, u64)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("expected two comma-separated values, got {s:?}");
    }
    Ok((parts[0].trim().parse()?, parts[1].trim().parse()?))
}
