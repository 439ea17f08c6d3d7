//! Heuristic agent-selection strategies used as comparison points.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::candidates;
use crate::adversarial::AttackConfig;
use crate::error::{Error, Result};
use crate::network::target_budget;
use crate::params::FjParameters;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Highest out-degree adversaries, highest out-degree targets (Variant I).
    OutDegree,
    /// Most stubborn adversaries, least stubborn targets (Variant IV).
    Stubbornness,
    /// Adversaries and targets already leaning toward the adversarial stance (Variant V).
    Supportive,
    /// Adversaries and targets leaning against it (Variant VI).
    Unsupportive,
    /// Highest externally supplied score for both roles, e.g. persona or
    /// persuasiveness ratings computed elsewhere.
    ExternalScores,
}

impl Variant {
    pub const BUILT_IN: [Variant; 4] = [
        Variant::OutDegree,
        Variant::Stubbornness,
        Variant::Supportive,
        Variant::Unsupportive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::OutDegree => "variant_I",
            Variant::Stubbornness => "variant_IV",
            Variant::Supportive => "variant_V",
            Variant::Unsupportive => "variant_VI",
            Variant::ExternalScores => "variant_external",
        }
    }
}

/// Builds the configuration a heuristic variant would attack with.
pub fn baseline_variant(
    params: &FjParameters,
    variant: Variant,
    external_scores: Option<&[f64]>,
    leader_size: usize,
    p: f64,
) -> Result<AttackConfig> {
    let n = params.agent_count();
    let net = params.network();
    // (adversary key, target key); larger key ranks first
    let keys: (Vec<f64>, Vec<f64>) = match variant {
        Variant::OutDegree => {
            let d: Vec<f64> = (0..n).map(|i| net.out_degree(i) as f64).collect();
            (d.clone(), d)
        }
        Variant::Stubbornness => {
            let t = params.stubbornness();
            (t.to_vec(), t.iter().map(|x| -x).collect())
        }
        Variant::Supportive => (params.intrinsic().to_vec(), params.intrinsic().to_vec()),
        Variant::Unsupportive => {
            let neg: Vec<f64> = params.intrinsic().iter().map(|x| -x).collect();
            (neg.clone(), neg)
        }
        Variant::ExternalScores => {
            let scores = external_scores.ok_or(Error::MissingScores(variant.name()))?;
            if scores.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "external scores",
                    expected: n,
                    found: scores.len(),
                });
            }
            (scores.to_vec(), scores.to_vec())
        }
    };
    let (adv_key, target_key) = keys;

    let adversaries: BTreeSet<usize> = top_by(0..n, &adv_key).into_iter().take(leader_size).collect();
    let mut hits = vec![0usize; n];
    let mut targets = BTreeMap::new();
    for &j in &adversaries {
        let budget = target_budget(net.out_degree(j));
        let mut chosen = BTreeSet::new();
        for i in top_by(candidates(params, &adversaries, j), &target_key) {
            if chosen.len() == budget {
                break;
            }
            if (hits[i] + 1) as f64 * p >= 1.0 {
                continue;
            }
            hits[i] += 1;
            chosen.insert(i);
        }
        targets.insert(j, chosen);
    }
    AttackConfig::new(net, adversaries, targets, p)
}

fn top_by(items: impl IntoIterator<Item = usize>, key: &[f64]) -> Vec<usize> {
    let mut v: Vec<usize> = items.into_iter().collect();
    v.sort_by(|&a, &b| match key[b].total_cmp(&key[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    v
}
