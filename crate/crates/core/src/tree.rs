//! UCB statistics over state fingerprints.
//!
//! Edges are keyed by the fingerprints of their endpoints, so permuted
//! discoveries of the same configuration share statistics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgeStats {
    pub q: f64,
    pub visits: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchTree {
    exploration: f64,
    edges: BTreeMap<(u64, u64), EdgeStats>,
    nodes: BTreeMap<u64, u64>,
    max_reward: f64,
}

impl Default for SearchTree {
    fn default() -> Self {
        Self::new(std::f64::consts::SQRT_2)
    }
}

impl SearchTree {
    pub fn new(exploration: f64) -> Self {
        Self {
            exploration,
            edges: BTreeMap::new(),
            nodes: BTreeMap::new(),
            max_reward: 0.0,
        }
    }

    pub fn exploration(&self) -> f64 {
        self.exploration
    }

    pub fn edge(&self, state: u64, child: u64) -> EdgeStats {
        self.edges.get(&(state, child)).copied().unwrap_or_default()
    }

    pub fn node_visits(&self, state: u64) -> u64 {
        self.nodes.get(&state).copied().unwrap_or(0)
    }

    pub fn max_reward(&self) -> f64 {
        self.max_reward
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&(u64, u64), &EdgeStats)> {
        self.edges.iter()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&u64, &u64)> {
        self.nodes.iter()
    }

    /// Rebuilds a tree from serialized parts.
    pub fn from_parts(
        exploration: f64,
        max_reward: f64,
        nodes: impl IntoIterator<Item = (u64, u64)>,
        edges: impl IntoIterator<Item = ((u64, u64), EdgeStats)>,
    ) -> Self {
        Self {
            exploration,
            edges: edges.into_iter().collect(),
            nodes: nodes.into_iter().collect(),
            max_reward,
        }
    }

    /// Index of the UCB-maximizing child. Unvisited children come first; ties
    /// go to the earliest candidate.
    pub fn select_action(&self, state: u64, children: &[u64]) -> Result<usize> {
        if children.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        let parent = self.node_visits(state) as f64;
        let log_parent = if parent > 0.0 { parent.ln() } else { 0.0 };
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, &child) in children.iter().enumerate() {
            let e = self.edge(state, child);
            if e.visits == 0 {
                return Ok(i);
            }
            let score = e.q + self.exploration * (log_parent / e.visits as f64).sqrt();
            if score > best_score {
                best_score = score;
                best = i;
            }
        }
        Ok(best)
    }

    /// Running-mean update of every edge on the trajectory.
    pub fn backpropagate(&mut self, trajectory: &[(u64, u64)], reward: f64) {
        self.max_reward = self.max_reward.max(reward);
        for &(state, child) in trajectory {
            let e = self.edges.entry((state, child)).or_default();
            e.visits += 1;
            e.q += (reward - e.q) / e.visits as f64;
            *self.nodes.entry(state).or_insert(0) += 1;
        }
    }

    /// Checks `N(s) = Σ_a N(s,a)` for every node.
    pub fn is_consistent(&self) -> bool {
        let mut sums: BTreeMap<u64, u64> = BTreeMap::new();
        for (&(s, _), e) in &self.edges {
            *sums.entry(s).or_insert(0) += e.visits;
        }
        sums == self.nodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cold_tree_picks_first() {
        let t = SearchTree::default();
        assert_eq!(t.select_action(1, &[10, 11, 12]).unwrap(), 0);
        assert_eq!(t.select_action(1, &[]), Err(Error::EmptyCandidates));
    }

    #[test]
    fn pure_exploitation() {
        let mut t = SearchTree::new(0.0);
        t.backpropagate(&[(1, 10)], 1.0);
        t.backpropagate(&[(1, 11)], 0.0);
        assert_eq!(t.node_visits(1), 2);
        assert_eq!(t.select_action(1, &[11, 10]).unwrap(), 1);
    }

    #[test]
    fn exploration_bonus_overrides_small_gap() {
        let t = SearchTree::from_parts(
            1.0,
            1.0,
            [(1, 100)],
            [
                ((1, 10), EdgeStats { q: 1.0, visits: 90 }),
                ((1, 11), EdgeStats { q: 0.9, visits: 10 }),
            ],
        );
        // 1 + sqrt(ln 100 / 90) = 1.226 < 0.9 + sqrt(ln 100 / 10) = 1.579
        assert_eq!(t.select_action(1, &[10, 11]).unwrap(), 1);
    }

    #[test]
    fn unvisited_ranks_above_visited() {
        let mut t = SearchTree::new(0.0);
        t.backpropagate(&[(1, 10)], 100.0);
        assert_eq!(t.select_action(1, &[10, 11]).unwrap(), 1);
    }

    #[test]
    fn running_mean() {
        let mut t = SearchTree::default();
        t.backpropagate(&[(1, 2)], 6.0);
        assert_eq!(t.edge(1, 2), EdgeStats { q: 6.0, visits: 1 });
        let mut t = SearchTree::from_parts(1.0, 10.0, [(1, 1)], [((1, 2), EdgeStats { q: 10.0, visits: 1 })]);
        t.backpropagate(&[(1, 2)], 6.0);
        assert_eq!(t.edge(1, 2), EdgeStats { q: 8.0, visits: 2 });
    }

    proptest! {
        #[test]
        fn replay_is_a_fixed_point_and_counts_balance(
            traj in prop::collection::vec((0u64..5, 0u64..5), 1..8),
            reward in 0.0f64..50.0,
            k in 1usize..6,
        ) {
            let mut t = SearchTree::default();
            t.backpropagate(&traj, reward);
            for _ in 0..k {
                t.backpropagate(&traj, reward);
            }
            for &(s, c) in &traj {
                prop_assert!((t.edge(s, c).q - reward).abs() < 1e-12);
            }
            prop_assert!(t.is_consistent());
            for (_, e) in t.edges() {
                prop_assert!(e.q >= 0.0 && e.q <= t.max_reward() + 1e-12);
            }
        }
    }
}
