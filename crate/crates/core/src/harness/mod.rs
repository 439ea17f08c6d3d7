//! Seeded instance generation and the experiment runners built on it.
//!
//! A scenario file fixes everything random through one master seed. Each
//! consumer of randomness draws from its own ChaCha stream, so adding a
//! strategy or an ablation never changes the generated instance.

mod ablation;
mod bench;
mod compare;
mod output;

use std::collections::BTreeSet;
use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

pub use ablation::{run_ablation, AblationMode};
pub use bench::{benchmark, BenchmarkReport};
pub use compare::{random_config, run_comparison, ResultRow, RowStatus, Strategy};
pub use output::{rows_to_csv, rows_to_json, write_rows, OutputFormat};

use crate::dynamics::{simulate, OpinionTrajectory};
use crate::error::{Error, Result};
use crate::io::load_params;
use crate::network::{adversary_budget, InfluenceNetwork};
use crate::optimizer::LeaderSizes;
use crate::params::{FjParameters, THETA_MIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    Complete,
    Ring,
    Star {
        #[serde(default)]
        center: usize,
    },
    ErdosRenyi {
        edge_prob: f64,
    },
    /// Parameter file on disk; sampling ranges are ignored.
    Custom {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LeaderSpec {
    Size(usize),
    Keyword(BudgetKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BudgetKeyword {
    #[serde(rename = "budget")]
    Budget,
}

impl Default for LeaderSpec {
    fn default() -> Self {
        LeaderSpec::Keyword(BudgetKeyword::Budget)
    }
}

impl std::str::FromStr for LeaderSpec {
    type Err = Error;

    /// A count, or `budget` for the largest allowed adversary set.
    fn from_str(s: &str) -> Result<Self> {
        if s == "budget" {
            return Ok(LeaderSpec::Keyword(BudgetKeyword::Budget));
        }
        s.parse()
            .map(LeaderSpec::Size)
            .map_err(|_| Error::InvalidParameter(format!("leader size {s:?} is neither a count nor \"budget\"")))
    }
}

impl LeaderSpec {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            LeaderSpec::Size(k) => k,
            LeaderSpec::Keyword(BudgetKeyword::Budget) => adversary_budget(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_id")]
    pub id: String,
    pub topology: Topology,
    #[serde(default)]
    pub n: usize,
    #[serde(default = "default_theta_range")]
    pub theta_range: [f64; 2],
    #[serde(default = "default_s_range")]
    pub s_range: [f64; 2],
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub leader_size: LeaderSpec,
    /// Search every adversary count up to `leader_size` instead of exactly it.
    #[serde(default)]
    pub all_leader_sizes: bool,
    /// Number of independently seeded instances.
    #[serde(default = "default_instances")]
    pub instances: usize,
    /// Strategies for `compare`; empty means all of them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub strategies: Vec<Strategy>,
}

fn default_id() -> String {
    "scenario".into()
}
fn default_theta_range() -> [f64; 2] {
    [0.2, 0.8]
}
fn default_s_range() -> [f64; 2] {
    [0.0, 1.0]
}
fn default_p() -> f64 {
    crate::adversarial::DEFAULT_P
}
fn default_instances() -> usize {
    1
}

impl Scenario {
    pub fn new(id: impl Into<String>, topology: Topology, n: usize, seed: u64) -> Self {
        Scenario {
            id: id.into(),
            topology,
            n,
            theta_range: default_theta_range(),
            s_range: default_s_range(),
            p: default_p(),
            seed,
            leader_size: LeaderSpec::default(),
            all_leader_sizes: false,
            instances: 1,
            strategies: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        for (name, r) in [("theta_range", self.theta_range), ("s_range", self.s_range)] {
            if !(0.0..=1.0).contains(&r[0]) || !(0.0..=1.0).contains(&r[1]) || r[0] > r[1] {
                return bad(format!("{name} {r:?} must be an ordered sub-interval of [0, 1]"));
            }
        }
        if !self.p.is_finite() || self.p <= 0.0 || self.p >= 1.0 {
            return bad(format!("p = {} must lie in (0, 1)", self.p));
        }
        if self.instances == 0 {
            return bad("instances must be at least 1".into());
        }
        match &self.topology {
            Topology::Custom { .. } => {}
            Topology::ErdosRenyi { edge_prob } if !(0.0..=1.0).contains(edge_prob) => {
                return bad(format!("edge_prob {edge_prob} outside [0, 1]"));
            }
            Topology::Star { center } if *center >= self.n => {
                return bad(format!("star center {center} outside 0..{}", self.n));
            }
            _ if self.n < 2 => return bad(format!("n = {} must be at least 2", self.n)),
            _ => {}
        }
        Ok(())
    }

    /// The `k`-th seeded instance of a multi-instance scenario.
    pub fn instance(&self, k: usize) -> Scenario {
        if self.instances == 1 {
            return self.clone();
        }
        Scenario {
            id: format!("{}-{k:04}", self.id),
            seed: splitmix64(self.seed ^ splitmix64(k as u64 + 1)),
            instances: 1,
            ..self.clone()
        }
    }

    pub fn instance_list(&self) -> Vec<Scenario> {
        (0..self.instances).map(|k| self.instance(k)).collect()
    }

    pub(crate) fn leader_sizes(&self, n: usize) -> LeaderSizes {
        let k = self.leader_size.resolve(n);
        if self.all_leader_sizes {
            LeaderSizes::UpTo(k)
        } else {
            LeaderSizes::Exactly(k)
        }
    }

    pub(crate) fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream as u64);
        rng
    }
}

/// Independent random substreams keyed off the scenario seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub(crate) enum Stream {
    Topology = 1,
    Stubbornness = 2,
    Intrinsic = 3,
    Weights = 4,
    RandomStrategy = 5,
    AblationTargets = 6,
    AblationBothTargets = 7,
    Trajectories = 8,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds the network and parameters of a single-instance scenario.
pub fn generate(scenario: &Scenario) -> Result<(InfluenceNetwork, FjParameters)> {
    scenario.validate()?;
    if let Topology::Custom { path } = &scenario.topology {
        let params = load_params(path)?;
        return Ok((params.network().clone(), params));
    }
    let n = scenario.n;
    let network = match scenario.topology {
        Topology::Complete => InfluenceNetwork::complete(n)?,
        Topology::Ring => InfluenceNetwork::ring(n)?,
        Topology::Star { center } => InfluenceNetwork::star(n, center)?,
        Topology::ErdosRenyi { edge_prob } => erdos_renyi(n, edge_prob, &mut scenario.rng(Stream::Topology))?,
        Topology::Custom { .. } => unreachable!(),
    };

    let mut rng = scenario.rng(Stream::Stubbornness);
    let theta = sample_range(&mut rng, n, scenario.theta_range)
        .into_iter()
        .map(|t| t.max(THETA_MIN))
        .collect();
    let s = sample_range(&mut scenario.rng(Stream::Intrinsic), n, scenario.s_range);

    // symmetric Dirichlet(1) over each in-neighborhood
    let mut rng = scenario.rng(Stream::Weights);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let nb = network.in_neighbors(i);
        let draws: Vec<f64> = nb.iter().map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = draws.iter().sum();
        for (&j, d) in nb.iter().zip(&draws) {
            w[(i, j)] = if nb.len() == 1 { 1.0 } else { d / total };
        }
    }
    let params = FjParameters::new(network.clone(), s, theta, w)?;
    Ok((network, params))
}

fn sample_range(rng: &mut ChaCha8Rng, n: usize, range: [f64; 2]) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if range[0] == range[1] {
                range[0]
            } else {
                rng.random_range(range[0]..=range[1])
            }
        })
        .collect()
}

/// Directed G(n, q); agents left without in-neighbors get one random in-edge.
fn erdos_renyi(n: usize, q: f64, rng: &mut ChaCha8Rng) -> Result<InfluenceNetwork> {
    let mut edges = BTreeSet::new();
    for from in 0..n {
        for to in 0..n {
            if from != to && rng.random_bool(q) {
                edges.insert((from, to));
            }
        }
    }
    for to in 0..n {
        if !edges.iter().any(|&(_, t)| t == to) {
            let mut from = rng.random_range(0..n - 1);
            if from >= to {
                from += 1;
            }
            edges.insert((from, to));
        }
    }
    InfluenceNetwork::new(n, edges)
}

/// Noiseless trajectories for recovery experiments: the first starts at the
/// intrinsic opinions, the rest at uniformly random states.
pub fn synthetic_trajectories(
    scenario: &Scenario,
    params: &FjParameters,
    count: usize,
    rounds: usize,
) -> Result<Vec<OpinionTrajectory>> {
    let mut rng = scenario.rng(Stream::Trajectories);
    let n = params.agent_count();
    (0..count)
        .map(|k| {
            let z0: Vec<f64> = if k == 0 {
                params.intrinsic().to_vec()
            } else {
                (0..n).map(|_| rng.random::<f64>()).collect()
            };
            simulate(params, &z0, rounds, &BTreeSet::new(), 1.0)
        })
        .collect()
}
