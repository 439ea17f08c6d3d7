//! Attack planning as a leader-follower problem: enumerate adversary sets,
//! assign targets for each one, keep the configuration with the largest
//! attacked aggregate.

mod baselines;
mod counting;
mod follower;
mod gains;
mod oracle;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use baselines::{baseline_variant, Variant};
pub use counting::{count_configurations, follower_subproblem_bound};
pub use follower::{solve_follower, solve_follower_capped, FollowerSolution};
pub use gains::{marginal_gains, MarginalGains};
pub use oracle::{brute_force_oracle, brute_force_oracle_capped};

pub(crate) use follower::candidates;

use crate::adversarial::{perturbed_influence, AttackConfig, PinnedSystem};
use crate::dynamics::closed_form_outcome;
use crate::error::{Error, Result};
use crate::network::adversary_budget;
use crate::params::FjParameters;

/// Joint target spaces larger than this are refused by exact enumeration.
pub const DEFAULT_EXACT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FollowerMode {
    /// First-order separable assignment, scored exactly.
    Approx,
    /// Exhaustive search over joint target sets.
    Exact,
}

impl std::str::FromStr for FollowerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approx" => Ok(FollowerMode::Approx),
            "exact" => Ok(FollowerMode::Exact),
            other => Err(Error::InvalidParameter(format!("unknown follower mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeaderSizes {
    Exactly(usize),
    /// Every size from 1 up to and including the bound.
    UpTo(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub p: f64,
    pub leader_sizes: LeaderSizes,
    pub mode: FollowerMode,
    pub exact_cap: u64,
}

impl SolveOptions {
    pub fn new(p: f64, leader_size: usize, mode: FollowerMode) -> Self {
        SolveOptions {
            p,
            leader_sizes: LeaderSizes::Exactly(leader_size),
            mode,
            exact_cap: DEFAULT_EXACT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackPlan {
    pub config: AttackConfig,
    pub predicted_g: f64,
    /// Aggregate without any attack.
    pub baseline_g: f64,
    pub leader_evaluations: u64,
    pub follower_candidates: u64,
    pub wall_time: Duration,
}

impl AttackPlan {
    pub fn delta_g(&self) -> f64 {
        self.predicted_g - self.baseline_g
    }
}

/// Plans an attack with exactly `leader_size` adversaries.
pub fn solve_attack(
    params: &FjParameters,
    p: f64,
    leader_size: usize,
    mode: FollowerMode,
) -> Result<AttackPlan> {
    solve_attack_with(params, &SolveOptions::new(p, leader_size, mode))
}

pub fn solve_attack_with(params: &FjParameters, opts: &SolveOptions) -> Result<AttackPlan> {
    let start = Instant::now();
    let sizes = leader_sizes(params.agent_count(), opts.leader_sizes)?;
    let baseline_g = closed_form_outcome(params)?.g;
    let best = leader_search(params.agent_count(), &sizes, |adv| {
        let sol = solve_follower_capped(params, adv, opts.p, opts.mode, opts.exact_cap)?;
        Ok((
            Scored {
                g: sol.g,
                config: AttackConfig::from_parts(adv.clone(), sol.targets, opts.p),
            },
            sol.evaluations,
        ))
    })?;
    Ok(AttackPlan {
        config: best.best.config,
        predicted_g: best.best.g,
        baseline_g,
        leader_evaluations: best.leader_evaluations,
        follower_candidates: best.follower_candidates,
        wall_time: start.elapsed(),
    })
}

pub(crate) fn leader_sizes(n: usize, requested: LeaderSizes) -> Result<Vec<usize>> {
    let budget = adversary_budget(n);
    if budget == 0 {
        return Err(Error::NoFeasibleAdversaries { n });
    }
    let (lo, hi) = match requested {
        LeaderSizes::Exactly(k) => (k, k),
        LeaderSizes::UpTo(k) => (1, k),
    };
    if lo == 0 || hi > budget {
        return Err(Error::BudgetExceeded(format!(
            "leader size must lie in 1..={budget} for {n} agents"
        )));
    }
    Ok((lo..=hi).collect())
}

/// Exact attacked aggregate, skipping revalidation of `config`.
pub(crate) fn evaluate_g(params: &FjParameters, config: &AttackConfig) -> Result<f64> {
    let w = perturbed_influence(params.influence(), config);
    Ok(PinnedSystem::build(params, &w, config.adversaries())?.g(config.adversaries().len()))
}

#[derive(Debug, Clone)]
pub(crate) struct Scored {
    pub g: f64,
    pub config: AttackConfig,
}

impl Scored {
    /// Larger g first, then lexicographically smaller adversaries, then targets.
    pub fn preferred(&self, other: &Scored) -> Ordering {
        match self.g.total_cmp(&other.g) {
            Ordering::Equal => other.config.order_key().cmp(&self.config.order_key()),
            ord => ord,
        }
    }
}

pub(crate) struct LeaderResult {
    pub best: Scored,
    pub leader_evaluations: u64,
    pub follower_candidates: u64,
}

/// Evaluates every adversary set of the given sizes, in parallel, and
/// reduces with a total order so the result does not depend on scheduling.
pub(crate) fn leader_search<F>(n: usize, sizes: &[usize], eval: F) -> Result<LeaderResult>
where
    F: Fn(&BTreeSet<usize>) -> Result<(Scored, u64)> + Sync,
{
    let sets: Vec<BTreeSet<usize>> = sizes
        .iter()
        .flat_map(|&k| (0..n).combinations(k).map(|c| c.into_iter().collect()))
        .collect();
    let results: Vec<Result<(Scored, u64)>> = sets.par_iter().map(&eval).collect();
    let mut best: Option<Scored> = None;
    let mut follower_candidates = 0;
    for r in results {
        let (scored, evals) = r?;
        follower_candidates += evals;
        if best
            .as_ref()
            .is_none_or(|b| scored.preferred(b) == Ordering::Greater)
        {
            best = Some(scored);
        }
    }
    Ok(LeaderResult {
        best: best.ok_or(Error::NoFeasibleAdversaries { n })?,
        leader_evaluations: sets.len() as u64,
        follower_candidates,
    })
}
