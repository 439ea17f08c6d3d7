//! Planner ablations. Each mode plans under a simplified model of the
//! attacked discussion; every resulting plan is then scored under the full
//! model (perturbed weights plus pinned adversaries).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;

use super::compare::{ms, ResultRow};
use super::{generate, Scenario, Stream};
use crate::adversarial::{perturbed_influence, AttackConfig};
use crate::dynamics::closed_form_outcome;
use crate::error::Result;
use crate::linalg::LinearSystem;
use crate::network::target_budget;
use crate::optimizer::{
    candidates, evaluate_g, leader_search, leader_sizes, solve_attack_with, FollowerMode, Scored,
    SolveOptions, DEFAULT_EXACT_CAP,
};
use crate::params::FjParameters;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AblationMode {
    /// Pinned broadcasters and targeted influence.
    Full,
    /// Adversaries keep updating (with intrinsic opinion 1); targeting kept.
    WithoutPinning,
    /// Pinning kept; the planner sees no targeting effect, so targets are random.
    WithoutTargeting,
    /// Neither: adversaries picked on the plain model, random targets.
    WithoutBoth,
}

impl AblationMode {
    pub const ALL: [AblationMode; 4] = [
        AblationMode::Full,
        AblationMode::WithoutPinning,
        AblationMode::WithoutTargeting,
        AblationMode::WithoutBoth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationMode::Full => "full",
            AblationMode::WithoutPinning => "wo_pinning",
            AblationMode::WithoutTargeting => "wo_targeting",
            AblationMode::WithoutBoth => "wo_both",
        }
    }
}

/// Runs all four planner modes on every instance of the scenario.
pub fn run_ablation(scenario: &Scenario) -> Result<Vec<ResultRow>> {
    scenario.validate()?;
    let mut rows = Vec::new();
    for inst in scenario.instance_list() {
        let (_, params) = generate(&inst)?;
        let g0 = closed_form_outcome(&params)?.g;
        for mode in AblationMode::ALL {
            let start = Instant::now();
            let (config, leaders, followers) = plan(&inst, &params, mode)?;
            rows.push(ResultRow::scored(
                &inst.id,
                mode.name(),
                &params,
                g0,
                &config,
                ms(start),
                leaders,
                followers,
            )?);
        }
    }
    rows.sort_by(|a, b| (&a.scenario, &a.strategy).cmp(&(&b.scenario, &b.strategy)));
    Ok(rows)
}

fn plan(scenario: &Scenario, params: &FjParameters, mode: AblationMode) -> Result<(AttackConfig, u64, u64)> {
    let n = params.agent_count();
    let p = scenario.p;
    let sizes = leader_sizes(n, scenario.leader_sizes(n))?;
    match mode {
        AblationMode::Full => {
            let opts = SolveOptions {
                p,
                leader_sizes: scenario.leader_sizes(n),
                mode: FollowerMode::Approx,
                exact_cap: DEFAULT_EXACT_CAP,
            };
            let plan = solve_attack_with(params, &opts)?;
            Ok((plan.config, plan.leader_evaluations, plan.follower_candidates))
        }
        AblationMode::WithoutPinning => {
            let res = leader_search(n, &sizes, |adv| {
                let cfg = unpinned_follower(params, adv, p)?;
                let g = unpinned_g(params, &cfg)?;
                Ok((Scored { g, config: cfg }, 1))
            })?;
            Ok((res.best.config, res.leader_evaluations, res.follower_candidates))
        }
        AblationMode::WithoutTargeting => {
            let res = leader_search(n, &sizes, |adv| {
                let cfg = AttackConfig::from_parts(adv.clone(), BTreeMap::new(), p);
                Ok((Scored { g: evaluate_g(params, &cfg)?, config: cfg }, 1))
            })?;
            let mut rng = scenario.rng(Stream::AblationTargets);
            let cfg = random_targets(params, res.best.config.adversaries(), p, &mut rng)?;
            Ok((cfg, res.leader_evaluations, res.follower_candidates))
        }
        AblationMode::WithoutBoth => {
            let res = leader_search(n, &sizes, |adv| {
                let cfg = AttackConfig::from_parts(adv.clone(), BTreeMap::new(), p);
                Ok((Scored { g: unpinned_g(params, &cfg)?, config: cfg }, 1))
            })?;
            let mut rng = scenario.rng(Stream::AblationBothTargets);
            let cfg = random_targets(params, res.best.config.adversaries(), p, &mut rng)?;
            Ok((cfg, res.leader_evaluations, res.follower_candidates))
        }
    }
}

/// Plain equilibrium with adversaries' intrinsic opinion set to 1 and
/// perturbed weights, but no pinning.
fn unpinned_g(params: &FjParameters, config: &AttackConfig) -> Result<f64> {
    let (a, b) = unpinned_system(params, &perturbed_influence(params.influence(), config), config.adversaries());
    Ok(LinearSystem::new(a)?.solve(&b)?.sum())
}

fn unpinned_system(params: &FjParameters, w: &DMatrix<f64>, adversaries: &BTreeSet<usize>) -> (DMatrix<f64>, DVector<f64>) {
    let n = params.agent_count();
    let theta = params.stubbornness();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - (1.0 - theta[i]) * w[(i, j)]
    });
    let b = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let s = if adversaries.contains(&i) { 1.0 } else { params.intrinsic()[i] };
            theta[i] * s
        }),
    );
    (a, b)
}

/// First-order target choice when adversaries are not pinned: the gain of
/// edge `j -> i` is `p·(z_j − r_i)·c_i`, so it depends on the adversary.
fn unpinned_follower(params: &FjParameters, adversaries: &BTreeSet<usize>, p: f64) -> Result<AttackConfig> {
    let n = params.agent_count();
    let w = params.influence();
    let theta = params.stubbornness();
    let (a, b) = unpinned_system(params, w, adversaries);
    let sys = LinearSystem::new(a)?;
    let z = sys.solve(&b)?;
    let col = sys.solve_transpose(&DVector::from_element(n, 1.0))?;
    let pull: Vec<f64> = (0..n)
        .map(|i| params.network().in_neighbors(i).iter().map(|&j| w[(i, j)] * z[j]).sum())
        .collect();
    let mut hits = vec![0usize; n];
    let mut targets = BTreeMap::new();
    for &j in adversaries {
        let gain = |i: usize| p * (z[j] - pull[i]) * (1.0 - theta[i]) * col[i];
        let mut ranked: Vec<usize> = candidates(params, adversaries, j)
            .into_iter()
            .filter(|&i| gain(i) > 0.0)
            .collect();
        ranked.sort_by(|&x, &y| gain(y).total_cmp(&gain(x)).then(x.cmp(&y)));
        let budget = target_budget(params.network().out_degree(j));
        let mut chosen = BTreeSet::new();
        for i in ranked {
            if chosen.len() == budget {
                break;
            }
            if (hits[i] + 1) as f64 * p >= 1.0 {
                continue;
            }
            hits[i] += 1;
            chosen.insert(i);
        }
        targets.insert(j, chosen);
    }
    Ok(AttackConfig::from_parts(adversaries.clone(), targets, p))
}

/// Each adversary spends its full budget on uniformly random out-neighbors.
fn random_targets<R: Rng + ?Sized>(
    params: &FjParameters,
    adversaries: &BTreeSet<usize>,
    p: f64,
    rng: &mut R,
) -> Result<AttackConfig> {
    let mut hits = vec![0usize; params.agent_count()];
    let mut targets = BTreeMap::new();
    for &j in adversaries {
        let cands = candidates(params, adversaries, j);
        let budget = target_budget(params.network().out_degree(j)).min(cands.len());
        let picked = index::sample(rng, cands.len(), budget)
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
    AttackConfig::new(params.network(), adversaries.clone(), targets, p)
}
