use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::One;

use crate::network::{target_budget, InfluenceNetwork};

/// Size of the naive search space: every adversary set of `leader_size`
/// agents times every budget-respecting target assignment.
pub fn count_configurations(network: &InfluenceNetwork, leader_size: usize) -> BigUint {
    let n = network.agent_count();
    let mut total = BigUint::default();
    for adv in (0..n).combinations(leader_size) {
        let mut product = BigUint::one();
        for &j in &adv {
            let free = network
                .out_neighbors(j)
                .iter()
                .filter(|i| adv.binary_search(i).is_err())
                .count();
            let budget = target_budget(network.out_degree(j));
            let options: BigUint = (0..=budget.min(free)).map(|t| binomial(free, t)).sum();
            product *= options;
        }
        total += product;
    }
    total
}

fn binomial(n: usize, k: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// ⌊(2N² − N − 1)/9⌋, the number of closed-form subproblems the follower
/// reduces to under a small stealth bound.
pub fn follower_subproblem_bound(n: usize) -> u64 {
    let n = n as u64;
    (2 * n * n).saturating_sub(n + 1) / 9
}
