//! Exhaustive reference solver. Shares nothing with the leader-follower path
//! except the closed-form evaluator and the tie-breaking order.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigUint;

use super::{count_configurations, AttackPlan, Scored, DEFAULT_EXACT_CAP};
use crate::adversarial::{adversarial_outcome, AttackConfig};
use crate::dynamics::closed_form_outcome;
use crate::error::{Error, Result};
use crate::network::{adversary_budget, target_budget};
use crate::params::FjParameters;

pub fn brute_force_oracle(params: &FjParameters, p: f64, leader_size: usize) -> Result<AttackPlan> {
    brute_force_oracle_capped(params, p, leader_size, DEFAULT_EXACT_CAP)
}

pub fn brute_force_oracle_capped(
    params: &FjParameters,
    p: f64,
    leader_size: usize,
    cap: u64,
) -> Result<AttackPlan> {
    let start = Instant::now();
    let net = params.network();
    let n = net.agent_count();
    let budget = adversary_budget(n);
    if budget == 0 {
        return Err(Error::NoFeasibleAdversaries { n });
    }
    if leader_size == 0 || leader_size > budget {
        return Err(Error::BudgetExceeded(format!(
            "leader size must lie in 1..={budget} for {n} agents"
        )));
    }
    // bitmask enumeration below
    if n > 40 {
        return Err(Error::EnumerationCap {
            count: format!("more than 2^{n}"),
            cap,
        });
    }
    let count = count_configurations(net, leader_size);
    if count > BigUint::from(cap) {
        return Err(Error::EnumerationCap {
            count: count.to_string(),
            cap,
        });
    }
    let baseline_g = closed_form_outcome(params)?.g;

    let mut best: Option<Scored> = None;
    let mut evaluations = 0u64;
    let mut leaders = 0u64;
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() as usize != leader_size {
            continue;
        }
        leaders += 1;
        let adv: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let adv_set: BTreeSet<usize> = adv.iter().copied().collect();
        // per adversary: every subset of free out-neighbors within budget
        let choices: Vec<Vec<BTreeSet<usize>>> = adv
            .iter()
            .map(|&j| {
                let free: Vec<usize> = net
                    .out_neighbors(j)
                    .iter()
                    .copied()
                    .filter(|i| !adv_set.contains(i))
                    .collect();
                let b = target_budget(net.out_degree(j));
                (0u64..(1u64 << free.len()))
                    .filter(|m| m.count_ones() as usize <= b)
                    .map(|m| {
                        (0..free.len())
                            .filter(|&k| m >> k & 1 == 1)
                            .map(|k| free[k])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut pick = vec![0usize; adv.len()];
        'assign: loop {
            let targets: BTreeMap<usize, BTreeSet<usize>> = adv
                .iter()
                .zip(&pick)
                .enumerate()
                .map(|(k, (&j, &c))| (j, choices[k][c].clone()))
                .collect();
            match AttackConfig::new(net, adv_set.clone(), targets, p) {
                Ok(config) => {
                    let out = adversarial_outcome(params, &config)?;
                    evaluations += 1;
                    let cand = Scored { g: out.g, config };
                    if best
                        .as_ref()
                        .is_none_or(|b| cand.preferred(b) == std::cmp::Ordering::Greater)
                    {
                        best = Some(cand);
                    }
                }
                // only the |𝒜ᵢ|·p < 1 condition can fail here
                Err(Error::InvalidConfig(_)) => {}
                Err(e) => return Err(e),
            }
            for k in 0..pick.len() {
                pick[k] += 1;
                if pick[k] < choices[k].len() {
                    continue 'assign;
                }
                pick[k] = 0;
            }
            break;
        }
    }
    let best = best.ok_or(Error::NoFeasibleAdversaries { n })?;
    Ok(AttackPlan {
        config: best.config,
        predicted_g: best.g,
        baseline_g,
        leader_evaluations: leaders,
        follower_candidates: evaluations,
        wall_time: start.elapsed(),
    })
}
