//! Attack planning for monitored multi-agent discussions.
//!
//! Agents in a discussion are modelled with Friedkin-Johnsen opinion
//! dynamics. Hijacked agents act as broadcasters pinned at the adversarial
//! stance and nudge a few chosen targets by a small, stealth-bounded
//! influence increment. The crate predicts the resulting group outcome in
//! closed form and searches for the adversary set and target assignment that
//! push it furthest. Model parameters can be fitted to observed opinion
//! trajectories first.
//!
//! The guide in `book/` walks through each part with runnable examples.
//!
//! ```
//! use opinion_attack::{closed_form_outcome, solve_attack, FjParameters, FollowerMode, InfluenceNetwork};
//!
//! let net = InfluenceNetwork::complete(7)?;
//! let w = FjParameters::uniform_weights(&net);
//! let params = FjParameters::new(net, vec![0.2; 7], vec![0.5; 7], w)?;
//! let plan = solve_attack(&params, 1e-3, 2, FollowerMode::Approx)?;
//! assert!(plan.predicted_g > closed_form_outcome(&params)?.g);
//! # Ok::<(), opinion_attack::Error>(())
//! ```

pub mod adversarial;
pub mod dynamics;
mod error;
pub mod io;
mod linalg;
pub mod network;
pub mod optimizer;
pub mod params;
pub mod harness;
pub mod recovery;

pub use adversarial::{
    adversarial_outcome, apply_adversarial_weights, outcome_metrics, simulate_adversarial,
    AdversarialOutcome, AttackConfig, OutcomeMetrics, DEFAULT_P,
};
pub use dynamics::{closed_form_outcome, fj_step, simulate, Equilibrium, OpinionTrajectory};
pub use error::{Error, Result};
pub use linalg::RCOND_THRESHOLD;
pub use network::{adversary_budget, target_budget, InfluenceNetwork};
pub use optimizer::{
    baseline_variant, brute_force_oracle, count_configurations, follower_subproblem_bound, marginal_gains, solve_attack,
    solve_attack_with, solve_follower, AttackPlan, FollowerMode, LeaderSizes, MarginalGains,
    SolveOptions, Variant,
};
pub use params::{FjParameters, THETA_MIN};

// Compiles every snippet of the guide as a doctest.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/adversarial.md")]
    mod adversarial {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/recovery.md")]
    mod recovery {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
