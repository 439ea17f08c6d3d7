//! Iterated Friedkin-Johnsen updates and the closed-form equilibrium.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::LinearSystem;
use crate::params::{check_unit_vector, FjParameters};

/// Expressed opinions for rounds `0..=rounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionTrajectory {
    values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pinned: BTreeSet<usize>,
}

impl OpinionTrajectory {
    /// Wraps observed rows. Needs at least two rows of equal width in [0, 1].
    pub fn from_rows(values: Vec<Vec<f64>>, pinned: BTreeSet<usize>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter(
                "a trajectory needs at least one round after the initial state".into(),
            ));
        }
        let n = values[0].len();
        for row in &values {
            check_unit_vector("z", row, n)?;
        }
        if let Some(&bad) = pinned.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidParameter(format!("pinned agent {bad} out of range")));
        }
        Ok(OpinionTrajectory { values, pinned })
    }

    pub fn rounds(&self) -> usize {
        self.values.len() - 1
    }

    pub fn agent_count(&self) -> usize {
        self.values[0].len()
    }

    /// Opinions at round `t`.
    pub fn at(&self, t: usize) -> &[f64] {
        &self.values[t]
    }

    pub fn last(&self) -> &[f64] {
        self.values.last().expect("nonempty")
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn pinned(&self) -> &BTreeSet<usize> {
        &self.pinned
    }
}

/// Fixed point of the dynamics together with the aggregate `g = 1ᵀz`.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub opinions: Vec<f64>,
    pub g: f64,
}

/// One synchronous update. Agents in `pinned` are set to `pinned_value`.
pub fn fj_step(
    params: &FjParameters,
    z: &[f64],
    pinned: &BTreeSet<usize>,
    pinned_value: f64,
) -> Result<Vec<f64>> {
    let n = params.agent_count();
    check_unit_vector("z", z, n)?;
    if !(0.0..=1.0).contains(&pinned_value) {
        return Err(Error::OutOfUnitRange {
            what: "pinned_value",
            index: 0,
            value: pinned_value,
        });
    }
    if let Some(&bad) = pinned.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidParameter(format!("pinned agent {bad} out of range")));
    }
    Ok(step_unchecked(params, z, pinned, pinned_value))
}

fn step_unchecked(
    params: &FjParameters,
    z: &[f64],
    pinned: &BTreeSet<usize>,
    pinned_value: f64,
) -> Vec<f64> {
    let w = params.influence();
    let net = params.network();
    let theta = params.stubbornness();
    let s = params.intrinsic();
    (0..z.len())
        .map(|i| {
            if pinned.contains(&i) {
                return pinned_value;
            }
            let social: f64 = net.in_neighbors(i).iter().map(|&j| w[(i, j)] * z[j]).sum();
            // convex combination; clamp only absorbs rounding
            (theta[i] * s[i] + (1.0 - theta[i]) * social).clamp(0.0, 1.0)
        })
        .collect()
}

/// Runs `rounds` updates from `z0`.
pub fn simulate(
    params: &FjParameters,
    z0: &[f64],
    rounds: usize,
    pinned: &BTreeSet<usize>,
    pinned_value: f64,
) -> Result<OpinionTrajectory> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(rounds + 1);
    let first = fj_step(params, z0, pinned, pinned_value)?;
    values.push(z0.to_vec());
    values.push(first);
    for _ in 1..rounds {
        let next = step_unchecked(params, values.last().unwrap(), pinned, pinned_value);
        values.push(next);
    }
    Ok(OpinionTrajectory {
        values,
        pinned: pinned.clone(),
    })
}

/// Solves `(I − (I−Θ)W) z = Θ s` and reports `g = 1ᵀz`.
pub fn closed_form_outcome(params: &FjParameters) -> Result<Equilibrium> {
    let n = params.agent_count();
    let theta = params.stubbornness();
    let w = params.influence();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - (1.0 - theta[i]) * w[(i, j)]
    });
    let b = DVector::from_iterator(n, (0..n).map(|i| theta[i] * params.intrinsic()[i]));
    let z = LinearSystem::new(a)?.solve(&b)?;
    let opinions: Vec<f64> = z.iter().copied().collect();
    let g = opinions.iter().sum();
    Ok(Equilibrium { opinions, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::InfluenceNetwork;

    fn two_agent() -> FjParameters {
        let net = InfluenceNetwork::new(2, [(0, 1), (1, 0)]).unwrap();
        let w = FjParameters::uniform_weights(&net);
        FjParameters::new(net, vec![0.0, 1.0], vec![0.5, 0.5], w).unwrap()
    }

    // plain scalar loop, kept separate from the implementation
    fn oracle_step(theta: &[f64], s: &[f64], w: &[[f64; 2]; 2], z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 2];
        for i in 0..2 {
            let mut acc = 0.0;
            for j in 0..2 {
                acc += w[i][j] * z[j];
            }
            out[i] = theta[i] * s[i] + (1.0 - theta[i]) * acc;
        }
        out
    }

    #[test]
    fn step_matches_hand_evaluation() {
        let p = two_agent();
        let z = fj_step(&p, &[0.0, 1.0], &BTreeSet::new(), 1.0).unwrap();
        let expected = oracle_step(&[0.5, 0.5], &[0.0, 1.0], &[[0.0, 1.0], [1.0, 0.0]], &[0.0, 1.0]);
        assert_eq!(expected, vec![0.5, 0.5]);
        assert_eq!(z, expected);
    }

    #[test]
    fn pinning_overrides_update() {
        let p = two_agent();
        let z = fj_step(&p, &[0.0, 1.0], &BTreeSet::from([1]), 1.0).unwrap();
        assert_eq!(z, vec![0.5, 1.0]);
    }

    #[test]
    fn fully_stubborn_agents_sit_at_intrinsic() {
        let net = InfluenceNetwork::complete(4).unwrap();
        let w = FjParameters::uniform_weights(&net);
        let s = vec![0.1, 0.7, 0.3, 0.9];
        let p = FjParameters::new(net, s.clone(), vec![1.0; 4], w).unwrap();
        let z = fj_step(&p, &[0.5; 4], &BTreeSet::new(), 1.0).unwrap();
        assert_eq!(z, s);
        let traj = simulate(&p, &[0.5; 4], 3, &BTreeSet::new(), 1.0).unwrap();
        for t in 1..=3 {
            assert_eq!(traj.at(t), s.as_slice());
        }
        let eq = closed_form_outcome(&p).unwrap();
        for (a, b) in eq.opinions.iter().zip(&s) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((eq.g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simulation_reaches_fixed_point() {
        let p = two_agent();
        let traj = simulate(&p, &[0.0, 1.0], 200, &BTreeSet::new(), 1.0).unwrap();
        assert!((traj.last()[0] - 1.0 / 3.0).abs() < 1e-8);
        assert!((traj.last()[1] - 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn one_round_equals_one_step() {
        let p = two_agent();
        let traj = simulate(&p, &[0.2, 0.4], 1, &BTreeSet::new(), 1.0).unwrap();
        let z = fj_step(&p, &[0.2, 0.4], &BTreeSet::new(), 1.0).unwrap();
        assert_eq!(traj.rounds(), 1);
        assert_eq!(traj.at(1), z.as_slice());
    }

    #[test]
    fn closed_form_two_agent() {
        // fixed-point iteration to 1e-12 as the oracle
        let mut z = [0.0, 1.0];
        loop {
            let next = oracle_step(&[0.5, 0.5], &[0.0, 1.0], &[[0.0, 1.0], [1.0, 0.0]], &z);
            let diff = (next[0] - z[0]).abs().max((next[1] - z[1]).abs());
            z = [next[0], next[1]];
            if diff < 1e-13 {
                break;
            }
        }
        let eq = closed_form_outcome(&two_agent()).unwrap();
        assert!((eq.opinions[0] - z[0]).abs() < 1e-12);
        assert!((eq.opinions[1] - z[1]).abs() < 1e-12);
        assert!((eq.g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_errors() {
        let p = two_agent();
        assert!(matches!(
            fj_step(&p, &[0.0], &BTreeSet::new(), 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            fj_step(&p, &[0.0, 1.2], &BTreeSet::new(), 1.0),
            Err(Error::OutOfUnitRange { .. })
        ));
        assert!(simulate(&p, &[0.0, 1.0], 0, &BTreeSet::new(), 1.0).is_err());
    }
}
