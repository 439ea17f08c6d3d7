#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use opinion_attack::harness::{generate, Scenario, Topology};
use opinion_attack::{AttackConfig, FjParameters};

pub fn topology(k: u64) -> Topology {
    match k % 4 {
        0 => Topology::Complete,
        1 => Topology::Ring,
        2 => Topology::Star { center: 0 },
        _ => Topology::ErdosRenyi { edge_prob: 0.4 },
    }
}

pub fn instance(topology: Topology, n: usize, seed: u64) -> FjParameters {
    generate(&Scenario::new("t", topology, n, seed)).unwrap().1
}

/// Pinned fixed-point iteration written out by hand: adversaries sit at 1,
/// targeted rows are rescaled by (1 - k p) and get +p per attacker. Works for
/// any real p, including negative values used by finite differences.
pub fn pinned_iteration(
    params: &FjParameters,
    adversaries: &BTreeSet<usize>,
    targets: &BTreeMap<usize, BTreeSet<usize>>,
    p: f64,
    tol: f64,
) -> Vec<f64> {
    let n = params.agent_count();
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            w[i][j] = params.influence()[(i, j)];
        }
    }
    for i in 0..n {
        let attackers: Vec<usize> = targets
            .iter()
            .filter(|(_, t)| t.contains(&i))
            .map(|(&j, _)| j)
            .collect();
        if attackers.is_empty() {
            continue;
        }
        let k = attackers.len() as f64;
        for j in 0..n {
            w[i][j] *= 1.0 - k * p;
        }
        for j in attackers {
            w[i][j] += p;
        }
    }
    let theta = params.stubbornness();
    let s = params.intrinsic();
    let mut z: Vec<f64> = (0..n).map(|i| if adversaries.contains(&i) { 1.0 } else { s[i] }).collect();
    for _ in 0..1_000_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| {
                if adversaries.contains(&i) {
                    1.0
                } else {
                    let social: f64 = (0..n).map(|j| w[i][j] * z[j]).sum();
                    theta[i] * s[i] + (1.0 - theta[i]) * social
                }
            })
            .collect();
        let diff = next.iter().zip(&z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        z = next;
        if diff < tol {
            break;
        }
    }
    z
}

pub fn single_target(params: &FjParameters, adversary: usize, target: usize, p: f64) -> AttackConfig {
    AttackConfig::unbudgeted(
        params.network(),
        BTreeSet::from([adversary]),
        BTreeMap::from([(adversary, BTreeSet::from([target]))]),
        p,
    )
    .unwrap()
}
