//! JSON file formats.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::adversarial::{AdversarialOutcome, AttackConfig};
use crate::dynamics::OpinionTrajectory;
use crate::error::{Error, Result};
use crate::network::InfluenceNetwork;
use crate::optimizer::AttackPlan;
use crate::params::FjParameters;

/// Network plus parameters. Weights are sparse `[i, j, w_ij]` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub theta: Vec<f64>,
    pub s: Vec<f64>,
    pub w: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_self_loops: bool,
}

impl ParameterFile {
    pub fn from_params(params: &FjParameters) -> Self {
        let net = params.network();
        let n = net.agent_count();
        let w = params.influence();
        let mut triples = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if w[(i, j)] != 0.0 {
                    triples.push((i, j, w[(i, j)]));
                }
            }
        }
        ParameterFile {
            n,
            edges: net.edges().map(|(a, b)| [a, b]).collect(),
            theta: params.stubbornness().to_vec(),
            s: params.intrinsic().to_vec(),
            w: triples,
            allow_self_loops: net.allows_self_loops(),
        }
    }

    pub fn network(&self) -> Result<InfluenceNetwork> {
        NetworkFile {
            n: self.n,
            edges: self.edges.clone(),
            allow_self_loops: self.allow_self_loops,
        }
        .into_network()
    }

    pub fn into_params(self) -> Result<FjParameters> {
        let net = self.network()?;
        let mut w = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.w {
            if i >= self.n || j >= self.n {
                return Err(Error::InvalidParameter(format!(
                    "weight entry [{i}, {j}] outside a {n}x{n} matrix",
                    n = self.n
                )));
            }
            w[(i, j)] = v;
        }
        FjParameters::new(net, self.s, self.theta, w)
    }
}

/// Graph support only, `{"n": N, "edges": [[j, i], ...]}`. A full parameter
/// file also parses as one, since extra fields are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_self_loops: bool,
}

impl NetworkFile {
    pub fn into_network(self) -> Result<InfluenceNetwork> {
        let edges = self.edges.iter().map(|e| (e[0], e[1]));
        if self.allow_self_loops {
            InfluenceNetwork::with_self_loops(self.n, edges)
        } else {
            InfluenceNetwork::new(self.n, edges)
        }
    }
}

pub fn load_network(path: impl AsRef<Path>) -> Result<InfluenceNetwork> {
    serde_json::from_str::<NetworkFile>(&fs::read_to_string(path)?)?.into_network()
}

pub fn load_params(path: impl AsRef<Path>) -> Result<FjParameters> {
    let text = fs::read_to_string(path)?;
    params_from_json(&text)
}

pub fn params_from_json(text: &str) -> Result<FjParameters> {
    serde_json::from_str::<ParameterFile>(text)?.into_params()
}

pub fn params_to_json(params: &FjParameters) -> String {
    serde_json::to_string_pretty(&ParameterFile::from_params(params)).expect("serializable")
}

pub fn save_params(params: &FjParameters, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, params_to_json(params) + "\n")?;
    Ok(())
}

/// `{"adversaries":[...], "targets":{"j":[i,...]}, "p":0.001}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfigFile {
    pub adversaries: Vec<usize>,
    #[serde(default)]
    pub targets: BTreeMap<String, Vec<usize>>,
    pub p: f64,
}

impl AttackConfigFile {
    pub fn from_config(config: &AttackConfig) -> Self {
        AttackConfigFile {
            adversaries: config.adversaries().iter().copied().collect(),
            targets: config
                .targets()
                .iter()
                .map(|(j, t)| (j.to_string(), t.iter().copied().collect()))
                .collect(),
            p: config.p(),
        }
    }

    fn parts(&self) -> Result<(BTreeSet<usize>, BTreeMap<usize, BTreeSet<usize>>)> {
        let mut targets = BTreeMap::new();
        for (key, list) in &self.targets {
            let j: usize = key
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("target key {key:?} is not an agent index")))?;
            targets.insert(j, list.iter().copied().collect());
        }
        Ok((self.adversaries.iter().copied().collect(), targets))
    }

    /// Validates including budgets.
    pub fn into_config(self, network: &InfluenceNetwork) -> Result<AttackConfig> {
        let (adv, targets) = self.parts()?;
        AttackConfig::new(network, adv, targets, self.p)
    }

    pub fn into_unbudgeted_config(self, network: &InfluenceNetwork) -> Result<AttackConfig> {
        let (adv, targets) = self.parts()?;
        AttackConfig::unbudgeted(network, adv, targets, self.p)
    }
}

/// `{"n": N, "trajectories": [[[z...], ...], ...]}` with an optional
/// externally estimated intrinsic opinion vector `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub n: usize,
    pub trajectories: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
}

impl TrajectoryFile {
    pub fn from_trajectories(trajectories: &[OpinionTrajectory]) -> Self {
        TrajectoryFile {
            n: trajectories.first().map_or(0, OpinionTrajectory::agent_count),
            trajectories: trajectories.iter().map(|t| t.rows().to_vec()).collect(),
            s: None,
        }
    }

    pub fn trajectories(&self) -> Result<Vec<OpinionTrajectory>> {
        self.trajectories
            .iter()
            .map(|rows| {
                let t = OpinionTrajectory::from_rows(rows.clone(), BTreeSet::new())?;
                if t.agent_count() != self.n {
                    return Err(Error::DimensionMismatch {
                        what: "trajectory width",
                        expected: self.n,
                        found: t.agent_count(),
                    });
                }
                Ok(t)
            })
            .collect()
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

const JSON_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub g: f64,
    pub agents: Vec<usize>,
    pub fixed_point: Vec<f64>,
    pub delta_g: f64,
    pub agreement_fraction: f64,
}

impl OutcomeReport {
    pub fn new(outcome: &AdversarialOutcome, base_g: f64) -> Self {
        let m = crate::adversarial::outcome_metrics(base_g, outcome);
        OutcomeReport {
            g: round_sig(outcome.g, JSON_DIGITS),
            agents: outcome.agents.clone(),
            fixed_point: outcome
                .fixed_point
                .iter()
                .map(|&z| round_sig(z, JSON_DIGITS))
                .collect(),
            delta_g: round_sig(m.delta_g, JSON_DIGITS),
            agreement_fraction: round_sig(m.agreement_fraction, JSON_DIGITS),
        }
    }
}

/// Serialized attack plan; timing is optional so reports can be compared
/// byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub config: AttackConfigFile,
    pub g0: f64,
    pub predicted_g: f64,
    pub delta_g: f64,
    pub leader_evaluations: u64,
    pub follower_candidates: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl PlanReport {
    pub fn new(plan: &AttackPlan, with_timing: bool) -> Self {
        PlanReport {
            config: AttackConfigFile::from_config(&plan.config),
            g0: round_sig(plan.baseline_g, JSON_DIGITS),
            predicted_g: round_sig(plan.predicted_g, JSON_DIGITS),
            delta_g: round_sig(plan.delta_g(), JSON_DIGITS),
            leader_evaluations: plan.leader_evaluations,
            follower_candidates: plan.follower_candidates,
            wall_time_ms: with_timing.then(|| plan.wall_time.as_secs_f64() * 1e3),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// `instance_id,g0,g_star,delta_g,wall_time_ms,leader_evals,follower_candidates`
    pub fn csv_row(plan: &AttackPlan, instance_id: &str) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            instance_id,
            round_sig(plan.baseline_g, 6),
            round_sig(plan.predicted_g, 6),
            round_sig(plan.delta_g(), 6),
            round_sig(plan.wall_time.as_secs_f64() * 1e3, 6),
            plan.leader_evaluations,
            plan.follower_candidates
        )
    }

    pub const CSV_HEADER: &'static str =
        "instance_id,g0,g_star,delta_g,wall_time_ms,leader_evals,follower_candidates";
}
