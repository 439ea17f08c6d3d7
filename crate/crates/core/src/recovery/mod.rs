//! Recovering stubbornness and influence weights from observed trajectories.
//!
//! For agent `i` the update `z_i(t+1) = θᵢ sᵢ + (1−θᵢ) Σⱼ w_ij z_j(t)` is
//! linear in `β = (θᵢ, (1−θᵢ)w_ij …)`, and `β` lies on the probability
//! simplex. Each row is therefore an independent simplex-constrained least
//! squares problem.

mod simplex;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use simplex::{project_to_simplex, simplex_least_squares, SimplexFit, SimplexSettings};

use crate::dynamics::{closed_form_outcome, OpinionTrajectory};
use crate::error::{Error, Result};
use crate::network::InfluenceNetwork;
use crate::params::{check_unit_vector, FjParameters, THETA_MIN};

/// Rows with `θ̂ ≥ 1 − STUBBORN_CUTOFF` carry no information about weights.
const STUBBORN_CUTOFF: f64 = 1e-9;
/// Design matrices with reciprocal condition below this are flagged.
const RANK_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryProblem {
    pub network: InfluenceNetwork,
    pub trajectories: Vec<OpinionTrajectory>,
    pub ridge: f64,
    /// Intrinsic opinions if estimated elsewhere; otherwise the first
    /// trajectory's initial state is used.
    pub intrinsic: Option<Vec<f64>>,
}

impl RecoveryProblem {
    pub fn new(network: InfluenceNetwork, trajectories: Vec<OpinionTrajectory>, ridge: f64) -> Result<Self> {
        let problem = RecoveryProblem {
            network,
            trajectories,
            ridge,
            intrinsic: None,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_intrinsic(mut self, s: Vec<f64>) -> Result<Self> {
        check_unit_vector("s", &s, self.network.agent_count())?;
        self.intrinsic = Some(s);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let n = self.network.agent_count();
        if self.trajectories.is_empty() {
            return Err(Error::InvalidParameter("no trajectories to learn from".into()));
        }
        for t in &self.trajectories {
            if t.agent_count() != n {
                return Err(Error::DimensionMismatch {
                    what: "trajectory width",
                    expected: n,
                    found: t.agent_count(),
                });
            }
            if t.rounds() < 2 {
                return Err(Error::InvalidParameter(
                    "every trajectory needs at least 2 rounds".into(),
                ));
            }
        }
        if !self.ridge.is_finite() || self.ridge < 0.0 {
            return Err(Error::InvalidParameter(format!("ridge {} must be nonnegative", self.ridge)));
        }
        Ok(())
    }

    fn intrinsic(&self) -> Vec<f64> {
        self.intrinsic
            .clone()
            .unwrap_or_else(|| self.trajectories[0].at(0).to_vec())
    }
}

/// Solver output for one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFit {
    /// `(θᵢ, v_ij for j in in_neighbors(i))`
    pub coefficients: Vec<f64>,
    pub fit: SimplexFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub params: FjParameters,
    /// RMS one-step prediction error of the recovered parameters.
    pub per_agent_residual: Vec<f64>,
    pub identifiability_flags: Vec<bool>,
    pub rows: Vec<RowFit>,
}

pub fn recover(problem: &RecoveryProblem) -> Result<RecoveryResult> {
    recover_with(problem, SimplexSettings::default())
}

pub fn recover_with(problem: &RecoveryProblem, settings: SimplexSettings) -> Result<RecoveryResult> {
    problem.validate()?;
    let net = &problem.network;
    let n = net.agent_count();
    let s = problem.intrinsic();

    let mut theta = vec![0.0; n];
    let mut w = DMatrix::zeros(n, n);
    let mut flags = vec![false; n];
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let support = net.in_neighbors(i);
        let (x, y) = design(problem, &s, i);
        // start fully stubborn: the zero-residual point when nothing moves
        let mut start = vec![0.0; support.len() + 1];
        start[0] = 1.0;
        let fit = simplex_least_squares(&x, &y, problem.ridge, &start, settings);
        let beta = fit.solution.clone();

        let a = beta[0];
        flags[i] = rank_deficient(&x);
        let social: f64 = beta[1..].iter().sum();
        if a >= 1.0 - STUBBORN_CUTOFF || social <= 0.0 {
            flags[i] = true;
            for &j in support {
                w[(i, j)] = 1.0 / support.len() as f64;
            }
        } else {
            for (k, &j) in support.iter().enumerate() {
                w[(i, j)] = beta[k + 1] / social;
            }
        }
        theta[i] = a.clamp(THETA_MIN, 1.0);
        rows.push(RowFit {
            coefficients: beta,
            fit,
        });
    }

    let params = FjParameters::new(net.clone(), s, theta, w)?;
    let per_agent_residual = one_step_residuals(&params, &problem.trajectories);
    Ok(RecoveryResult {
        params,
        per_agent_residual,
        identifiability_flags: flags,
        rows,
    })
}

fn design(problem: &RecoveryProblem, s: &[f64], i: usize) -> (DMatrix<f64>, DVector<f64>) {
    let support = problem.network.in_neighbors(i);
    let samples: usize = problem.trajectories.iter().map(OpinionTrajectory::rounds).sum();
    let mut x = DMatrix::zeros(samples, support.len() + 1);
    let mut y = DVector::zeros(samples);
    let mut r = 0;
    for traj in &problem.trajectories {
        for t in 0..traj.rounds() {
            let z = traj.at(t);
            x[(r, 0)] = s[i];
            for (k, &j) in support.iter().enumerate() {
                x[(r, k + 1)] = z[j];
            }
            y[r] = traj.at(t + 1)[i];
            r += 1;
        }
    }
    (x, y)
}

fn rank_deficient(x: &DMatrix<f64>) -> bool {
    let eig = SymmetricEigen::new(x.transpose() * x);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    max <= 0.0 || min / max < RANK_RCOND
}

/// RMS of `z_i(t+1) − prediction` over every transition of every trajectory.
pub fn one_step_residuals(params: &FjParameters, trajectories: &[OpinionTrajectory]) -> Vec<f64> {
    let n = params.agent_count();
    let theta = params.stubbornness();
    let s = params.intrinsic();
    let w = params.influence();
    let mut sq = vec![0.0; n];
    let mut count = 0usize;
    for traj in trajectories {
        for t in 0..traj.rounds() {
            let z = traj.at(t);
            let next = traj.at(t + 1);
            for i in 0..n {
                let social: f64 = params.network().in_neighbors(i).iter().map(|&j| w[(i, j)] * z[j]).sum();
                let pred = theta[i] * s[i] + (1.0 - theta[i]) * social;
                sq[i] += (pred - next[i]).powi(2);
            }
            count += 1;
        }
    }
    sq.iter().map(|v| (v / count.max(1) as f64).sqrt()).collect()
}

/// Largest absolute error in θ and in W between two parameter sets on the
/// same network.
pub fn max_abs_errors(recovered: &FjParameters, truth: &FjParameters) -> (f64, f64) {
    let theta = recovered
        .stubbornness()
        .iter()
        .zip(truth.stubbornness())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let weights = (recovered.influence() - truth.influence()).amax();
    (theta, weights)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RobustnessRow {
    pub noise: f64,
    pub theta_error: f64,
    pub weight_error: f64,
    pub g_error: f64,
}

/// Perturbs every trajectory entry by i.i.d. uniform noise in
/// `[−level, level]` (clamped to [0, 1]), recovers, and averages errors
/// against `truth` over `seeds` noise draws.
pub fn recovery_robustness(
    problem: &RecoveryProblem,
    truth: &FjParameters,
    noise_levels: &[f64],
    seeds: u64,
) -> Result<Vec<RobustnessRow>> {
    let true_g = closed_form_outcome(truth)?.g;
    let support: Vec<(usize, usize)> = truth.network().edges().map(|(j, i)| (i, j)).collect();
    let mut table = Vec::with_capacity(noise_levels.len());
    for &level in noise_levels {
        let (mut te, mut we, mut ge) = (0.0, 0.0, 0.0);
        for seed in 0..seeds.max(1) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noisy = problem
                .trajectories
                .iter()
                .map(|traj| {
                    let rows = traj
                        .rows()
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|&z| {
                                    let e = if level > 0.0 { rng.random_range(-level..=level) } else { 0.0 };
                                    (z + e).clamp(0.0, 1.0)
                                })
                                .collect()
                        })
                        .collect();
                    OpinionTrajectory::from_rows(rows, traj.pinned().clone())
                })
                .collect::<Result<Vec<_>>>()?;
            let noisy_problem = RecoveryProblem {
                trajectories: noisy,
                ..problem.clone()
            };
            let fit = recover(&noisy_problem)?;
            let rec = &fit.params;
            te += rec
                .stubbornness()
                .iter()
                .zip(truth.stubbornness())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / truth.agent_count() as f64;
            we += support
                .iter()
                .map(|&(i, j)| (rec.influence()[(i, j)] - truth.influence()[(i, j)]).abs())
                .sum::<f64>()
                / support.len() as f64;
            ge += (closed_form_outcome(rec)?.g - true_g).abs();
        }
        let k = seeds.max(1) as f64;
        table.push(RobustnessRow {
            noise: level,
            theta_error: te / k,
            weight_error: we / k,
            g_error: ge / k,
        });
    }
    Ok(table)
}
