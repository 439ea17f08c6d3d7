//! First-order value of targeting each non-adversarial agent.
//!
//! With adversaries pinned at 1 and no targets, let `z⁰` be the restricted
//! equilibrium and `B = I − (I−Θ)W_UU`. Adding one adversarial edge into
//! agent `i` changes the right-hand side of row `i` by
//! `(1−θᵢ)·p·(1 − rᵢ)`, where `rᵢ = Σ_{j∈U} w_ij z⁰_j + Σ_{j∈A} w_ij` is the
//! opinion mass agent `i` currently listens to. Hence
//!
//! ```text
//! ∂g/∂(edges into i) ≈ p·(1 − rᵢ)·cᵢ,   c = (I−Θ_U)·B⁻ᵀ·1
//! ```
//!
//! independent of which adversary supplies the edge.

use std::collections::BTreeSet;

use nalgebra::DVector;

use crate::adversarial::PinnedSystem;
use crate::error::{Error, Result};
use crate::params::FjParameters;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalGains {
    /// Non-adversarial agents, ascending.
    pub agents: Vec<usize>,
    pub base_fixed_point: Vec<f64>,
    /// `rᵢ`, the pinned-neighborhood average at the untargeted equilibrium.
    pub pull: Vec<f64>,
    /// `cᵢ`, sensitivity of `g` to the right-hand side of row `i`.
    pub sensitivity: Vec<f64>,
    /// `mᵢ = p·(1 − rᵢ)·cᵢ`.
    pub gain: Vec<f64>,
    position: Vec<Option<usize>>,
}

impl MarginalGains {
    /// Gain for agent `i`; zero for adversaries.
    pub fn gain_of(&self, i: usize) -> f64 {
        self.position
            .get(i)
            .copied()
            .flatten()
            .map_or(0.0, |k| self.gain[k])
    }
}

pub fn marginal_gains(
    params: &FjParameters,
    adversaries: &BTreeSet<usize>,
    p: f64,
) -> Result<MarginalGains> {
    let n = params.agent_count();
    if let Some(&j) = adversaries.iter().find(|&&j| j >= n) {
        return Err(Error::InvalidConfig(format!("adversary {j} out of range")));
    }
    let w = params.influence();
    let theta = params.stubbornness();
    let sys = PinnedSystem::build(params, w, adversaries)?;
    let m = sys.agents.len();

    let mut position = vec![None; n];
    for (k, &i) in sys.agents.iter().enumerate() {
        position[i] = Some(k);
    }

    let pull: Vec<f64> = sys
        .agents
        .iter()
        .map(|&i| {
            params
                .network()
                .in_neighbors(i)
                .iter()
                .map(|&j| w[(i, j)] * position[j].map_or(1.0, |k| sys.z[k]))
                .sum()
        })
        .collect();

    let col = sys.system.solve_transpose(&DVector::from_element(m, 1.0))?;
    let sensitivity: Vec<f64> = sys
        .agents
        .iter()
        .enumerate()
        .map(|(k, &i)| (1.0 - theta[i]) * col[k])
        .collect();
    let gain = pull
        .iter()
        .zip(&sensitivity)
        .map(|(r, c)| p * (1.0 - r) * c)
        .collect();

    Ok(MarginalGains {
        base_fixed_point: sys.z.iter().copied().collect(),
        agents: sys.agents,
        pull,
        sensitivity,
        gain,
        position,
    })
}
