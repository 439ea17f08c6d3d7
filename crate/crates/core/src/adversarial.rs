//! Hijacked agents as pinned broadcasters plus the stealth-bounded influence
//! increment they apply to their targets.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{simulate, OpinionTrajectory};
use crate::error::{Error, Result};
use crate::linalg::LinearSystem;
use crate::network::{adversary_budget, target_budget, InfluenceNetwork};
use crate::params::{check_unit_vector, FjParameters};

/// Default influence increment per adversary-target edge.
pub const DEFAULT_P: f64 = 1e-3;

/// Who attacks whom, with the influence increment `p`.
///
/// Every adversary has an entry in the target map, possibly empty. Both the
/// set and the map are ordered, so the derived ordering of configurations is
/// lexicographic by agent index.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    adversaries: BTreeSet<usize>,
    targets: BTreeMap<usize, BTreeSet<usize>>,
    p: f64,
}

impl AttackConfig {
    /// Validated configuration that also respects the adversary and target
    /// budgets of `network`.
    pub fn new(
        network: &InfluenceNetwork,
        adversaries: BTreeSet<usize>,
        targets: BTreeMap<usize, BTreeSet<usize>>,
        p: f64,
    ) -> Result<Self> {
        let cfg = Self::unbudgeted(network, adversaries, targets, p)?;
        cfg.check_budget(network)?;
        Ok(cfg)
    }

    /// Validated configuration without the budget limits. Useful for what-if
    /// evaluation on graphs too small to admit any budgeted attack.
    pub fn unbudgeted(
        network: &InfluenceNetwork,
        adversaries: BTreeSet<usize>,
        mut targets: BTreeMap<usize, BTreeSet<usize>>,
        p: f64,
    ) -> Result<Self> {
        if let Some(&j) = targets.keys().find(|j| !adversaries.contains(j)) {
            return Err(Error::InvalidConfig(format!(
                "agent {j} has targets but is not an adversary"
            )));
        }
        for &j in &adversaries {
            targets.entry(j).or_default();
        }
        let cfg = AttackConfig {
            adversaries,
            targets,
            p,
        };
        cfg.check_structure(network)?;
        Ok(cfg)
    }

    /// No adversaries at all.
    pub fn none(p: f64) -> Self {
        AttackConfig {
            adversaries: BTreeSet::new(),
            targets: BTreeMap::new(),
            p,
        }
    }

    pub fn adversaries(&self) -> &BTreeSet<usize> {
        &self.adversaries
    }

    pub fn targets(&self) -> &BTreeMap<usize, BTreeSet<usize>> {
        &self.targets
    }

    pub fn targets_of(&self, j: usize) -> Option<&BTreeSet<usize>> {
        self.targets.get(&j)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Number of adversaries targeting agent `i`, i.e. |𝒜ᵢ|.
    pub fn attackers_of(&self, i: usize) -> usize {
        self.targets.values().filter(|t| t.contains(&i)).count()
    }

    pub fn total_targets(&self) -> usize {
        self.targets.values().map(BTreeSet::len).sum()
    }

    /// Skips validation; callers guarantee the structural invariants.
    pub(crate) fn from_parts(
        adversaries: BTreeSet<usize>,
        targets: BTreeMap<usize, BTreeSet<usize>>,
        p: f64,
    ) -> Self {
        AttackConfig {
            adversaries,
            targets,
            p,
        }
    }

    /// Sort key used for deterministic tie-breaking.
    pub(crate) fn order_key(&self) -> (Vec<usize>, Vec<Vec<usize>>) {
        (
            self.adversaries.iter().copied().collect(),
            self.targets
                .values()
                .map(|t| t.iter().copied().collect())
                .collect(),
        )
    }

    /// Index, disjointness, edge and weight-positivity checks.
    pub fn check_structure(&self, network: &InfluenceNetwork) -> Result<()> {
        let n = network.agent_count();
        if !self.p.is_finite() || self.p < 0.0 {
            return Err(Error::InvalidConfig(format!("p = {} must be nonnegative", self.p)));
        }
        if let Some(&j) = self.adversaries.iter().find(|&&j| j >= n) {
            return Err(Error::InvalidConfig(format!("adversary {j} out of range")));
        }
        let mut hits: BTreeMap<usize, usize> = BTreeMap::new();
        for (&j, set) in &self.targets {
            for &i in set {
                if i >= n {
                    return Err(Error::InvalidConfig(format!("target {i} out of range")));
                }
                if self.adversaries.contains(&i) {
                    return Err(Error::InvalidConfig(format!(
                        "adversary {j} targets agent {i}, which is itself an adversary"
                    )));
                }
                if !network.has_edge(j, i) {
                    return Err(Error::InvalidConfig(format!(
                        "adversary {j} targets {i} but there is no edge {j} -> {i}"
                    )));
                }
                *hits.entry(i).or_default() += 1;
            }
        }
        if let Some((&i, &k)) = hits.iter().find(|(_, &k)| k as f64 * self.p >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "agent {i} is targeted by {k} adversaries and {k}·p = {} >= 1",
                k as f64 * self.p
            )));
        }
        Ok(())
    }

    pub fn check_budget(&self, network: &InfluenceNetwork) -> Result<()> {
        let n = network.agent_count();
        let budget = adversary_budget(n);
        if self.adversaries.len() > budget {
            return Err(Error::BudgetExceeded(format!(
                "{} adversaries among {n} agents, at most {budget} allowed",
                self.adversaries.len()
            )));
        }
        for (&j, set) in &self.targets {
            let b = target_budget(network.out_degree(j));
            if set.len() > b {
                return Err(Error::BudgetExceeded(format!(
                    "adversary {j} has {} targets, at most {b} allowed",
                    set.len()
                )));
            }
        }
        Ok(())
    }
}

/// Equilibrium of the attacked discussion.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialOutcome {
    /// Non-adversarial agents, ascending; indexes `fixed_point`.
    pub agents: Vec<usize>,
    pub fixed_point: Vec<f64>,
    pub g: f64,
    pub config: AttackConfig,
}

impl AdversarialOutcome {
    /// Opinions for all agents, adversaries reported at 1.
    pub fn full_opinions(&self, n: usize) -> Vec<f64> {
        let mut z = vec![1.0; n];
        for (&i, &v) in self.agents.iter().zip(&self.fixed_point) {
            z[i] = v;
        }
        z
    }
}

/// Rescales each targeted row by `1 − |𝒜ᵢ|p` and adds `p` toward every
/// adversary targeting it.
pub fn apply_adversarial_weights(
    params: &FjParameters,
    config: &AttackConfig,
) -> Result<FjParameters> {
    config.check_structure(params.network())?;
    if config.total_targets() == 0 {
        return Ok(params.clone());
    }
    Ok(params.with_influence(perturbed_influence(params.influence(), config))?)
}

pub(crate) fn perturbed_influence(w: &DMatrix<f64>, config: &AttackConfig) -> DMatrix<f64> {
    let mut w = w.clone();
    let mut attackers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&j, set) in config.targets() {
        for &i in set {
            attackers.entry(i).or_default().push(j);
        }
    }
    let p = config.p();
    for (i, js) in attackers {
        let scale = 1.0 - js.len() as f64 * p;
        let mut row = w.row_mut(i);
        row *= scale;
        for j in js {
            row[j] += p;
        }
    }
    w
}

/// The pinned linear system over non-adversarial agents:
/// `(I − (I−Θ)W_UU) z_U = Θ s_U + (I−Θ) W_UA 1`.
pub(crate) struct PinnedSystem {
    pub agents: Vec<usize>,
    pub system: LinearSystem,
    pub z: DVector<f64>,
}

impl PinnedSystem {
    pub fn build(params: &FjParameters, w: &DMatrix<f64>, adversaries: &BTreeSet<usize>) -> Result<Self> {
        let n = params.agent_count();
        let agents: Vec<usize> = (0..n).filter(|i| !adversaries.contains(i)).collect();
        if agents.is_empty() {
            return Err(Error::InvalidConfig(
                "every agent is an adversary; nobody is left to influence".into(),
            ));
        }
        let theta = params.stubbornness();
        let s = params.intrinsic();
        let m = agents.len();
        let a = DMatrix::from_fn(m, m, |r, c| {
            let (i, j) = (agents[r], agents[c]);
            let delta = if r == c { 1.0 } else { 0.0 };
            delta - (1.0 - theta[i]) * w[(i, j)]
        });
        let rhs = DVector::from_iterator(
            m,
            agents.iter().map(|&i| {
                let pull: f64 = adversaries.iter().map(|&j| w[(i, j)]).sum();
                theta[i] * s[i] + (1.0 - theta[i]) * pull
            }),
        );
        let system = LinearSystem::new(a)?;
        let z = system.solve(&rhs)?;
        Ok(PinnedSystem { agents, system, z })
    }

    pub fn g(&self, adversary_count: usize) -> f64 {
        self.z.sum() + adversary_count as f64
    }
}

/// Closed-form equilibrium with adversaries pinned at 1 and targets perturbed.
pub fn adversarial_outcome(params: &FjParameters, config: &AttackConfig) -> Result<AdversarialOutcome> {
    config.check_structure(params.network())?;
    let w = perturbed_influence(params.influence(), config);
    let sys = PinnedSystem::build(params, &w, config.adversaries())?;
    let g = sys.g(config.adversaries().len());
    Ok(AdversarialOutcome {
        fixed_point: sys.z.iter().copied().collect(),
        agents: sys.agents,
        g,
        config: config.clone(),
    })
}

/// Iterates the attacked dynamics: perturbed weights, adversaries with
/// intrinsic opinion 1 and expressed opinion pinned at 1 from round 0.
pub fn simulate_adversarial(
    params: &FjParameters,
    config: &AttackConfig,
    z0: &[f64],
    rounds: usize,
) -> Result<OpinionTrajectory> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be at least 1".into()));
    }
    check_unit_vector("z0", z0, params.agent_count())?;
    let attacked = apply_adversarial_weights(params, config)?;
    let mut s = attacked.intrinsic().to_vec();
    let mut start = z0.to_vec();
    for &j in config.adversaries() {
        s[j] = 1.0;
        start[j] = 1.0;
    }
    let attacked = attacked.with_intrinsic(s)?;
    simulate(&attacked, &start, rounds, config.adversaries(), 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeMetrics {
    pub delta_g: f64,
    /// Share of non-adversarial agents ending at or above 0.5.
    pub agreement_fraction: f64,
}

pub fn outcome_metrics(base_g: f64, attacked: &AdversarialOutcome) -> OutcomeMetrics {
    let agree = attacked.fixed_point.iter().filter(|&&z| z >= 0.5).count();
    OutcomeMetrics {
        delta_g: attacked.g - base_g,
        agreement_fraction: agree as f64 / attacked.fixed_point.len() as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::closed_form_outcome;

    // Three agents; agent 2 plays the adversary. The edge 0 -> 2 only exists
    // so that agent 2 has an in-neighbor; its row never matters once pinned.
    pub(crate) fn three_agent() -> FjParameters {
        let net = InfluenceNetwork::new(3, [(1, 0), (2, 0), (0, 1), (2, 1), (0, 2)]).unwrap();
        let w = FjParameters::uniform_weights(&net);
        FjParameters::new(net, vec![0.0, 0.0, 0.5], vec![0.5, 0.5, 0.5], w).unwrap()
    }

    fn attack(params: &FjParameters, targets: &[usize], p: f64) -> AttackConfig {
        AttackConfig::unbudgeted(
            params.network(),
            BTreeSet::from([2]),
            BTreeMap::from([(2, targets.iter().copied().collect())]),
            p,
        )
        .unwrap()
    }

    #[test]
    fn no_targets_leaves_weights_alone() {
        let p = three_agent();
        let cfg = attack(&p, &[], 0.3);
        assert_eq!(apply_adversarial_weights(&p, &cfg).unwrap(), p);
    }

    #[test]
    fn rescale_row_arithmetic() {
        let net = InfluenceNetwork::new(3, [(1, 0), (2, 0), (0, 1), (0, 2)]).unwrap();
        let w = FjParameters::uniform_weights(&net);
        let p = FjParameters::new(net.clone(), vec![0.0; 3], vec![0.5; 3], w).unwrap();
        let cfg = AttackConfig::unbudgeted(
            &net,
            BTreeSet::from([1]),
            BTreeMap::from([(1, BTreeSet::from([0]))]),
            0.1,
        )
        .unwrap();
        let out = apply_adversarial_weights(&p, &cfg).unwrap();
        let row = out.influence().row(0);
        assert!((row[1] - 0.55).abs() < 1e-15);
        assert!((row[2] - 0.45).abs() < 1e-15);
        assert_eq!(row[0], 0.0);

        // adversary 1 has no edge into agent 2
        let bad = AttackConfig::unbudgeted(
            &net,
            BTreeSet::from([1]),
            BTreeMap::from([(1, BTreeSet::from([2]))]),
            0.1,
        );
        assert!(matches!(bad, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn three_agent_closed_form() {
        let p = three_agent();
        let cfg = attack(&p, &[0], 0.1);
        let w = apply_adversarial_weights(&p, &cfg).unwrap();
        assert!((w.influence()[(0, 1)] - 0.45).abs() < 1e-15);
        assert!((w.influence()[(0, 2)] - 0.55).abs() < 1e-15);
        let out = adversarial_outcome(&p, &cfg).unwrap();
        assert_eq!(out.agents, vec![0, 1]);
        // values from 500 rounds of pinned iteration
        assert!((out.fixed_point[0] - 0.350_993_377).abs() < 1e-6);
        assert!((out.fixed_point[1] - 0.337_748_344).abs() < 1e-6);
        assert!((out.g - 1.688_741_722).abs() < 1e-6);
        let sim = simulate_adversarial(&p, &cfg, &[0.0, 0.0, 1.0], 500).unwrap();
        assert!((sim.last()[0] - out.fixed_point[0]).abs() < 1e-6);
        assert!((sim.last()[1] - out.fixed_point[1]).abs() < 1e-6);
        assert!(sim.rows().iter().all(|z| z[2] == 1.0));

        let untargeted = adversarial_outcome(&p, &attack(&p, &[], 0.1)).unwrap();
        assert!(out.g >= untargeted.g);
    }

    #[test]
    fn empty_attack_matches_plain_equilibrium() {
        let p = three_agent();
        let out = adversarial_outcome(&p, &AttackConfig::none(DEFAULT_P)).unwrap();
        assert_eq!(out.g, closed_form_outcome(&p).unwrap().g);
        let m = outcome_metrics(closed_form_outcome(&p).unwrap().g, &out);
        assert_eq!(m.delta_g, 0.0);
    }

    #[test]
    fn agreement_fraction_threshold() {
        let out = AdversarialOutcome {
            agents: vec![0, 1, 2],
            fixed_point: vec![0.6; 3],
            g: 1.8,
            config: AttackConfig::none(DEFAULT_P),
        };
        assert_eq!(outcome_metrics(1.0, &out).agreement_fraction, 1.0);
    }

    #[test]
    fn budget_rejects_oversized_adversary_set() {
        let net = InfluenceNetwork::complete(7).unwrap();
        let adv: BTreeSet<usize> = (0..7).filter(|&i| i != 3).collect();
        let err = AttackConfig::new(&net, adv, BTreeMap::new(), DEFAULT_P).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(_)));
        // 6 out-neighbors -> at most 1 target each
        let err = AttackConfig::new(
            &net,
            BTreeSet::from([0]),
            BTreeMap::from([(0, BTreeSet::from([1, 2]))]),
            DEFAULT_P,
        )
        .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(_)));
    }

    #[test]
    fn rejects_targeting_adversary_and_excess_p() {
        let net = InfluenceNetwork::complete(7).unwrap();
        assert!(AttackConfig::new(
            &net,
            BTreeSet::from([0, 1]),
            BTreeMap::from([(0, BTreeSet::from([1]))]),
            DEFAULT_P
        )
        .is_err());
        assert!(AttackConfig::new(
            &net,
            BTreeSet::from([0, 1]),
            BTreeMap::from([(0, BTreeSet::from([2])), (1, BTreeSet::from([2]))]),
            0.5
        )
        .is_err());
        assert!(AttackConfig::new(&net, BTreeSet::from([0]), BTreeMap::from([(4, BTreeSet::new())]), 0.1).is_err());
    }
}
