use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Directed influence graph. An edge `(from, to)` means agent `from`
/// influences agent `to`, so it supports the weight `w[to][from]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceNetwork {
    n: usize,
    in_nbrs: Vec<Vec<usize>>,
    out_nbrs: Vec<Vec<usize>>,
    allow_self_loops: bool,
}

impl InfluenceNetwork {
    /// Builds a network without self loops. Duplicate edges are merged.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::build(n, edges, false)
    }

    pub fn with_self_loops<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::build(n, edges, true)
    }

    fn build<I>(n: usize, edges: I, allow_self_loops: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::InvalidNetwork("agent count must be positive".into()));
        }
        let mut set = BTreeSet::new();
        for (from, to) in edges {
            if from >= n || to >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge {from} -> {to} references an agent outside 0..{n}"
                )));
            }
            if from == to && !allow_self_loops {
                return Err(Error::InvalidNetwork(format!("self loop on agent {from}")));
            }
            set.insert((from, to));
        }
        let mut in_nbrs = vec![Vec::new(); n];
        let mut out_nbrs = vec![Vec::new(); n];
        for &(from, to) in &set {
            in_nbrs[to].push(from);
            out_nbrs[from].push(to);
        }
        for nb in &mut in_nbrs {
            nb.sort_unstable();
        }
        if let Some(i) = in_nbrs.iter().position(Vec::is_empty) {
            return Err(Error::InvalidNetwork(format!("agent {i} has no in-neighbor")));
        }
        Ok(InfluenceNetwork {
            n,
            in_nbrs,
            out_nbrs,
            allow_self_loops,
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(
            n,
            (0..n).flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i))),
        )
    }

    /// Bidirectional ring: every agent talks to its two neighbours.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidNetwork("ring needs at least 2 agents".into()));
        }
        Self::new(
            n,
            (0..n).flat_map(|i| [(i, (i + 1) % n), ((i + 1) % n, i)]),
        )
    }

    /// Bidirectional star around `center`.
    pub fn star(n: usize, center: usize) -> Result<Self> {
        if n < 2 || center >= n {
            return Err(Error::InvalidNetwork("star needs at least 2 agents and a valid center".into()));
        }
        Self::new(
            n,
            (0..n)
                .filter(|&i| i != center)
                .flat_map(|i| [(center, i), (i, center)]),
        )
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    pub fn allows_self_loops(&self) -> bool {
        self.allow_self_loops
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        to < self.n && self.in_nbrs[to].binary_search(&from).is_ok()
    }

    /// Agents `j` with an edge `j -> i`, ascending.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_nbrs[i]
    }

    /// Agents `i` with an edge `j -> i`, ascending.
    pub fn out_neighbors(&self, j: usize) -> &[usize] {
        &self.out_nbrs[j]
    }

    pub fn out_degree(&self, j: usize) -> usize {
        self.out_nbrs[j].len()
    }

    /// All edges as `(from, to)`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_nbrs
            .iter()
            .enumerate()
            .flat_map(|(from, outs)| outs.iter().map(move |&to| (from, to)))
    }

    pub fn edge_count(&self) -> usize {
        self.out_nbrs.iter().map(Vec::len).sum()
    }
}

/// Maximum number of adversaries among `n` agents: ⌊(n−1)/3⌋.
pub fn adversary_budget(n: usize) -> usize {
    n.saturating_sub(1) / 3
}

/// Maximum number of targets for an agent with `m` out-neighbors: ⌊(m−1)/3⌋.
pub fn target_budget(m: usize) -> usize {
    m.saturating_sub(1) / 3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_degrees() {
        let g = InfluenceNetwork::complete(5).unwrap();
        for i in 0..5 {
            assert_eq!(g.in_neighbors(i).len(), 4);
            assert_eq!(g.out_degree(i), 4);
        }
        assert_eq!(g.edge_count(), 20);
    }

    #[test]
    fn star_and_ring() {
        let s = InfluenceNetwork::star(5, 0).unwrap();
        assert_eq!(s.out_degree(0), 4);
        assert_eq!(s.in_neighbors(3), &[0]);
        let r = InfluenceNetwork::ring(4).unwrap();
        assert_eq!(r.in_neighbors(0), &[1, 3]);
    }

    #[test]
    fn rejects_self_loops_by_default() {
        assert!(InfluenceNetwork::new(2, [(0, 0), (0, 1), (1, 0)]).is_err());
        let g = InfluenceNetwork::with_self_loops(2, [(0, 0), (0, 1)]).unwrap();
        assert!(g.has_edge(0, 0));
    }

    #[test]
    fn rejects_missing_in_neighbor() {
        let err = InfluenceNetwork::new(3, [(0, 1), (1, 0)]).unwrap_err();
        assert!(err.to_string().contains("agent 2"));
    }

    #[test]
    fn budgets_use_floor() {
        assert_eq!(adversary_budget(3), 0);
        assert_eq!(adversary_budget(4), 1);
        assert_eq!(adversary_budget(13), 4);
        assert_eq!(target_budget(0), 0);
        assert_eq!(target_budget(1), 0);
        assert_eq!(target_budget(4), 1);
        assert_eq!(target_budget(12), 3);
    }
}
