use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use super::{evaluate_g, FollowerMode, DEFAULT_EXACT_CAP};
use crate::adversarial::AttackConfig;
use crate::error::{Error, Result};
use crate::network::{adversary_budget, target_budget};
use crate::optimizer::gains::marginal_gains;
use crate::params::FjParameters;

/// Best target assignment for a fixed adversary set.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerSolution {
    pub targets: BTreeMap<usize, BTreeSet<usize>>,
    /// Exact attacked aggregate of the returned assignment.
    pub g: f64,
    /// Closed-form evaluations spent.
    pub evaluations: u64,
}

pub fn solve_follower(
    params: &FjParameters,
    adversaries: &BTreeSet<usize>,
    p: f64,
    mode: FollowerMode,
) -> Result<FollowerSolution> {
    solve_follower_capped(params, adversaries, p, mode, DEFAULT_EXACT_CAP)
}

pub fn solve_follower_capped(
    params: &FjParameters,
    adversaries: &BTreeSet<usize>,
    p: f64,
    mode: FollowerMode,
    exact_cap: u64,
) -> Result<FollowerSolution> {
    let n = params.agent_count();
    if adversaries.len() > adversary_budget(n) {
        return Err(Error::BudgetExceeded(format!(
            "{} adversaries among {n} agents, at most {} allowed",
            adversaries.len(),
            adversary_budget(n)
        )));
    }
    match mode {
        FollowerMode::Approx => approx(params, adversaries, p),
        FollowerMode::Exact => exact(params, adversaries, p, exact_cap),
    }
}

/// Out-neighbors of `j` outside the adversary set.
pub(crate) fn candidates(params: &FjParameters, adversaries: &BTreeSet<usize>, j: usize) -> Vec<usize> {
    params
        .network()
        .out_neighbors(j)
        .iter()
        .copied()
        .filter(|i| !adversaries.contains(i))
        .collect()
}

/// Each adversary takes its top-gain out-neighbors up to budget. Gains are
/// additive per edge at first order, so adversaries do not interact.
fn approx(params: &FjParameters, adversaries: &BTreeSet<usize>, p: f64) -> Result<FollowerSolution> {
    let gains = marginal_gains(params, adversaries, p)?;
    let mut hits = vec![0usize; params.agent_count()];
    let mut targets = BTreeMap::new();
    for &j in adversaries {
        let budget = target_budget(params.network().out_degree(j));
        let mut ranked: Vec<usize> = candidates(params, adversaries, j)
            .into_iter()
            .filter(|&i| gains.gain_of(i) > 0.0)
            .collect();
        ranked.sort_by(|&a, &b| gains.gain_of(b).total_cmp(&gains.gain_of(a)).then(a.cmp(&b)));
        let mut chosen = BTreeSet::new();
        for i in ranked {
            if chosen.len() == budget {
                break;
            }
            // keep every perturbed row nonnegative
            if (hits[i] + 1) as f64 * p >= 1.0 {
                continue;
            }
            hits[i] += 1;
            chosen.insert(i);
        }
        targets.insert(j, chosen);
    }
    let config = AttackConfig::from_parts(adversaries.clone(), targets, p);
    let g = evaluate_g(params, &config)?;
    Ok(FollowerSolution {
        targets: config.targets().clone(),
        g,
        evaluations: 1,
    })
}

fn exact(
    params: &FjParameters,
    adversaries: &BTreeSet<usize>,
    p: f64,
    cap: u64,
) -> Result<FollowerSolution> {
    let adv: Vec<usize> = adversaries.iter().copied().collect();
    let options: Vec<Vec<Vec<usize>>> = adv
        .iter()
        .map(|&j| {
            let cands = candidates(params, adversaries, j);
            let budget = target_budget(params.network().out_degree(j)).min(cands.len());
            (0..=budget)
                .flat_map(|t| cands.iter().copied().combinations(t))
                .collect()
        })
        .collect();
    let total = options
        .iter()
        .fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128));
    if total > cap as u128 {
        return Err(Error::EnumerationCap {
            count: total.to_string(),
            cap,
        });
    }

    let n = params.agent_count();
    let mut idx = vec![0usize; adv.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluations = 0u64;
    let mut hits = vec![0usize; n];
    loop {
        hits.iter_mut().for_each(|h| *h = 0);
        for (k, &o) in idx.iter().enumerate() {
            for &i in &options[k][o] {
                hits[i] += 1;
            }
        }
        if hits.iter().all(|&h| (h as f64) * p < 1.0) {
            let targets = adv
                .iter()
                .zip(&idx)
                .enumerate()
                .map(|(k, (&j, &o))| (j, options[k][o].iter().copied().collect()))
                .collect();
            let config = AttackConfig::from_parts(adversaries.clone(), targets, p);
            let g = evaluate_g(params, &config)?;
            evaluations += 1;
            let replace = match &best {
                None => true,
                Some((bg, bidx)) => match g.total_cmp(bg) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => {
                        let key = |ix: &[usize]| -> Vec<&Vec<usize>> {
                            ix.iter().enumerate().map(|(k, &o)| &options[k][o]).collect()
                        };
                        key(&idx) < key(bidx)
                    }
                },
            };
            if replace {
                best = Some((g, idx.clone()));
            }
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == idx.len() {
                let (g, bidx) = best.expect("the empty assignment is always feasible");
                let targets = adv
                    .iter()
                    .zip(&bidx)
                    .enumerate()
                    .map(|(k, (&j, &o))| (j, options[k][o].iter().copied().collect()))
                    .collect();
                return Ok(FollowerSolution {
                    targets,
                    g,
                    evaluations,
                });
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
