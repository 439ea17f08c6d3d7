use serde::Serialize;

use super::{generate, Scenario};
use crate::error::{Error, Result};
use crate::optimizer::{count_configurations, solve_attack_with, FollowerMode, SolveOptions, DEFAULT_EXACT_CAP};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub scenario: String,
    pub n: usize,
    pub leader_size: usize,
    pub repeats: usize,
    pub mean_solve_seconds: f64,
    pub mean_leader_eval_seconds: f64,
    pub leader_evaluations: u64,
    /// Naive search-space size, exact decimal.
    pub config_count: String,
}

/// Times the approximate planner end to end; the per-leader figure is the
/// solve time divided by the number of adversary sets evaluated.
pub fn benchmark(scenario: &Scenario, repeats: usize) -> Result<BenchmarkReport> {
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    let (net, params) = generate(scenario)?;
    let n = net.agent_count();
    let leader_size = scenario.leader_size.resolve(n);
    let opts = SolveOptions {
        p: scenario.p,
        leader_sizes: scenario.leader_sizes(n),
        mode: FollowerMode::Approx,
        exact_cap: DEFAULT_EXACT_CAP,
    };
    let mut total = 0.0;
    let mut leaders = 0;
    for _ in 0..repeats {
        let plan = solve_attack_with(&params, &opts)?;
        total += plan.wall_time.as_secs_f64();
        leaders = plan.leader_evaluations;
    }
    let mean = total / repeats as f64;
    Ok(BenchmarkReport {
        scenario: scenario.id.clone(),
        n,
        leader_size,
        repeats,
        mean_solve_seconds: mean,
        mean_leader_eval_seconds: mean / leaders.max(1) as f64,
        leader_evaluations: leaders,
        config_count: count_configurations(&net, leader_size).to_string(),
    })
}
