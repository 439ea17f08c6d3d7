use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::{index, IndexedRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{generate, Scenario, Stream};
use crate::adversarial::{adversarial_outcome, outcome_metrics, AttackConfig};
use crate::dynamics::closed_form_outcome;
use crate::error::{Error, Result};
use crate::network::target_budget;
use crate::optimizer::{baseline_variant, candidates, solve_attack_with, FollowerMode, SolveOptions, Variant, DEFAULT_EXACT_CAP};
use crate::params::FjParameters;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "ours_approx")]
    OursApprox,
    #[serde(rename = "ours_exact")]
    OursExact,
    #[serde(rename = "variant_I")]
    VariantI,
    #[serde(rename = "variant_IV")]
    VariantIV,
    #[serde(rename = "variant_V")]
    VariantV,
    #[serde(rename = "variant_VI")]
    VariantVI,
    #[serde(rename = "random")]
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::OursApprox,
        Strategy::OursExact,
        Strategy::VariantI,
        Strategy::VariantIV,
        Strategy::VariantV,
        Strategy::VariantVI,
        Strategy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::OursApprox => "ours_approx",
            Strategy::OursExact => "ours_exact",
            Strategy::VariantI => Variant::OutDegree.name(),
            Strategy::VariantIV => Variant::Stubbornness.name(),
            Strategy::VariantV => Variant::Supportive.name(),
            Strategy::VariantVI => Variant::Unsupportive.name(),
            Strategy::Random => "random",
        }
    }

    fn variant(self) -> Option<Variant> {
        match self {
            Strategy::VariantI => Some(Variant::OutDegree),
            Strategy::VariantIV => Some(Variant::Stubbornness),
            Strategy::VariantV => Some(Variant::Supportive),
            Strategy::VariantVI => Some(Variant::Unsupportive),
            _ => None,
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub strategy: String,
    pub status: RowStatus,
    pub g0: f64,
    pub g_attack: Option<f64>,
    pub delta_g: Option<f64>,
    pub agreement_fraction: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub leader_evals: u64,
    pub follower_candidates: u64,
    /// Chosen adversaries and targets, `"j:i,i;j:..."`.
    pub config: String,
}

impl ResultRow {
    pub(crate) fn scored(
        scenario: &str,
        strategy: &str,
        params: &FjParameters,
        g0: f64,
        config: &AttackConfig,
        elapsed_ms: f64,
        leader_evals: u64,
        follower_candidates: u64,
    ) -> Result<Self> {
        config.check_structure(params.network())?;
        config.check_budget(params.network())?;
        let out = adversarial_outcome(params, config)?;
        let m = outcome_metrics(g0, &out);
        Ok(ResultRow {
            scenario: scenario.to_string(),
            strategy: strategy.to_string(),
            status: RowStatus::Ok,
            g0,
            g_attack: Some(out.g),
            delta_g: Some(m.delta_g),
            agreement_fraction: Some(m.agreement_fraction),
            wall_time_ms: Some(elapsed_ms),
            leader_evals,
            follower_candidates,
            config: describe(config),
        })
    }

    fn skipped(scenario: &str, strategy: &str, g0: f64) -> Self {
        ResultRow {
            scenario: scenario.to_string(),
            strategy: strategy.to_string(),
            status: RowStatus::Skipped,
            g0,
            g_attack: None,
            delta_g: None,
            agreement_fraction: None,
            wall_time_ms: None,
            leader_evals: 0,
            follower_candidates: 0,
            config: String::new(),
        }
    }
}

fn describe(config: &AttackConfig) -> String {
    config
        .targets()
        .iter()
        .map(|(j, t)| {
            let list: Vec<String> = t.iter().map(ToString::to_string).collect();
            format!("{j}:{}", list.join(","))
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Scores every strategy on every instance of the scenario. Rows come back
/// sorted by (scenario id, strategy name).
pub fn run_comparison(scenario: &Scenario, strategies: &[Strategy]) -> Result<Vec<ResultRow>> {
    scenario.validate()?;
    let mut rows = Vec::new();
    if strategies.is_empty() {
        return Ok(rows);
    }
    for inst in scenario.instance_list() {
        rows.extend(compare_instance(&inst, strategies)?);
    }
    rows.sort_by(|a, b| (&a.scenario, &a.strategy).cmp(&(&b.scenario, &b.strategy)));
    Ok(rows)
}

fn compare_instance(scenario: &Scenario, strategies: &[Strategy]) -> Result<Vec<ResultRow>> {
    let (_, params) = generate(scenario)?;
    let n = params.agent_count();
    let g0 = closed_form_outcome(&params)?.g;
    let leader_size = scenario.leader_size.resolve(n);
    let unique: BTreeSet<Strategy> = strategies.iter().copied().collect();
    let mut rows = Vec::new();
    for strategy in unique {
        let start = Instant::now();
        let row = match strategy {
            Strategy::OursApprox | Strategy::OursExact => {
                let mode = if strategy == Strategy::OursExact {
                    FollowerMode::Exact
                } else {
                    FollowerMode::Approx
                };
                let opts = SolveOptions {
                    p: scenario.p,
                    leader_sizes: scenario.leader_sizes(n),
                    mode,
                    exact_cap: DEFAULT_EXACT_CAP,
                };
                match solve_attack_with(&params, &opts) {
                    Ok(plan) => ResultRow::scored(
                        &scenario.id,
                        strategy.name(),
                        &params,
                        g0,
                        &plan.config,
                        ms(start),
                        plan.leader_evaluations,
                        plan.follower_candidates,
                    )?,
                    Err(Error::EnumerationCap { .. }) => ResultRow::skipped(&scenario.id, strategy.name(), g0),
                    Err(e) => return Err(e),
                }
            }
            Strategy::Random => {
                let mut rng = scenario.rng(Stream::RandomStrategy);
                let cfg = random_config(&params, leader_size, scenario.p, &mut rng)?;
                ResultRow::scored(&scenario.id, strategy.name(), &params, g0, &cfg, ms(start), 0, 0)?
            }
            variant => {
                let v = variant.variant().expect("remaining strategies are variants");
                let cfg = baseline_variant(&params, v, None, leader_size, scenario.p)?;
                ResultRow::scored(&scenario.id, strategy.name(), &params, g0, &cfg, ms(start), 0, 0)?
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

pub(crate) fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Uniformly random feasible configuration: a uniform adversary set, then for
/// each adversary a uniform pick among all budget-respecting target sets.
pub fn random_config<R: Rng + ?Sized>(
    params: &FjParameters,
    leader_size: usize,
    p: f64,
    rng: &mut R,
) -> Result<AttackConfig> {
    let n = params.agent_count();
    let mut adv: Vec<usize> = index::sample(rng, n, leader_size.min(n)).into_vec();
    adv.sort_unstable();
    let adversaries: BTreeSet<usize> = adv.iter().copied().collect();
    let mut hits = vec![0usize; n];
    let mut targets = BTreeMap::new();
    for &j in &adv {
        let cands = candidates(params, &adversaries, j);
        let budget = target_budget(params.network().out_degree(j)).min(cands.len());
        // size t with probability proportional to C(|cands|, t)
        let weights: Vec<(usize, f64)> = (0..=budget).map(|t| (t, binomial_f64(cands.len(), t))).collect();
        let size = weights
            .choose_weighted(rng, |w| w.1)
            .map(|w| w.0)
            .unwrap_or(0);
        let picked: BTreeSet<usize> = index::sample(rng, cands.len(), size)
            .into_iter()
            .map(|k| cands[k])
            .filter(|&i| {
                let ok = (hits[i] + 1) as f64 * p < 1.0;
                if ok {
                    hits[i] += 1;
                }
                ok
            })
            .collect();
        targets.insert(j, picked);
    }
    AttackConfig::new(params.network(), adversaries, targets, p)
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
