use std::collections::HashMap;

use rand::Rng;

use super::argmax_random;
use crate::bamdp::ActionId;

pub type NodeId = u32;

/// Visit count and running mean return of one action at a node.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionStats {
    pub action: ActionId,
    pub visits: u64,
    pub value: f64,
}

/// Search statistics of one history.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchNode {
    pub visits: u64,
    pub actions: Vec<ActionStats>,
}

impl SearchNode {
    pub fn new(actions: &[ActionId]) -> Self {
        Self {
            visits: 0,
            actions: actions
                .iter()
                .map(|&action| ActionStats {
                    action,
                    visits: 0,
                    value: 0.0,
                })
                .collect(),
        }
    }

    pub fn stats(&self, a: ActionId) -> Option<&ActionStats> {
        self.actions.iter().find(|s| s.action == a)
    }

    pub fn is_terminal(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Arena of nodes keyed by `(parent, action, observation)`.
#[derive(Debug, Clone, Default)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
    children: HashMap<(NodeId, usize, u128), NodeId>,
}

impl SearchTree {
    pub fn with_root(actions: &[ActionId]) -> Self {
        Self {
            nodes: vec![SearchNode::new(actions)],
            children: HashMap::new(),
        }
    }

    pub const ROOT: NodeId = 0;

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id as usize]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut SearchNode {
        &mut self.nodes[id as usize]
    }

    pub fn root(&self) -> &SearchNode {
        self.node(Self::ROOT)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn child(&self, parent: NodeId, action: ActionId, obs: u128) -> Option<NodeId> {
        self.children.get(&(parent, action.0, obs)).copied()
    }

    pub fn children_of(
        &self,
        parent: NodeId,
    ) -> impl Iterator<Item = (ActionId, u128, NodeId)> + '_ {
        self.children
            .iter()
            .filter(move |((p, _, _), _)| *p == parent)
            .map(|(&(_, a, o), &c)| (ActionId(a), o, c))
    }

    /// Existing child, or a new one with the given legal actions.
    pub fn child_or_insert(
        &mut self,
        parent: NodeId,
        action: ActionId,
        obs: u128,
        actions: &[ActionId],
    ) -> NodeId {
        let next = self.nodes.len() as NodeId;
        let id = *self.children.entry((parent, action.0, obs)).or_insert(next);
        if id == next {
            self.nodes.push(SearchNode::new(actions));
        }
        id
    }

    /// Every node satisfies `N(h) = sum_a N(h, a)`.
    pub fn is_count_consistent(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.visits == n.actions.iter().map(|s| s.visits).sum::<u64>())
    }
}

/// `Q + c * sqrt(ln N / N_a)`, infinite for an untried action.
pub fn ucb_score(stats: &ActionStats, node_visits: u64, c: f64) -> f64 {
    if stats.visits == 0 {
        return f64::INFINITY;
    }
    stats.value + c * ((node_visits.max(1) as f64).ln() / stats.visits as f64).sqrt()
}

/// Index into `node.actions` of the UCB maximiser, ties broken uniformly.
pub fn ucb_select<R: Rng + ?Sized>(node: &SearchNode, c: f64, rng: &mut R) -> usize {
    let scores: Vec<f64> = node
        .actions
        .iter()
        .map(|s| ucb_score(s, node.visits, c))
        .collect();
    argmax_random(&scores, rng).expect("selection at a terminal node")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    fn node(stats: &[(u64, f64)]) -> SearchNode {
        SearchNode {
            visits: stats.iter().map(|s| s.0).sum(),
            actions: stats
                .iter()
                .enumerate()
                .map(|(i, &(visits, value))| ActionStats {
                    action: ActionId(i),
                    visits,
                    value,
                })
                .collect(),
        }
    }

    #[test]
    fn untried_action_goes_first() {
        let mut rng = SimRng::seed_from_u64(0);
        assert_eq!(ucb_select(&node(&[(10, 5.0), (0, 0.0)]), 1.0, &mut rng), 1);
    }

    #[test]
    fn zero_exploration_is_greedy() {
        let mut rng = SimRng::seed_from_u64(0);
        assert_eq!(
            ucb_select(&node(&[(10, 0.2), (3, 0.9), (7, 0.5)]), 0.0, &mut rng),
            1
        );
    }

    #[test]
    fn bonus_matches_formula() {
        let n = node(&[(4, 1.0), (12, 1.0)]);
        let s = ucb_score(&n.actions[0], n.visits, 2.0);
        assert!((s - (1.0 + 2.0 * (16f64.ln() / 4.0).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn exact_ties_split_evenly() {
        let mut rng = SimRng::seed_from_u64(9);
        let n = node(&[(5, 1.0), (5, 1.0)]);
        let firsts = (0..4000)
            .filter(|_| ucb_select(&n, 1.0, &mut rng) == 0)
            .count();
        assert!((1800..2200).contains(&firsts), "{firsts}");
    }

    #[test]
    fn children_are_keyed_by_observation() {
        let mut t = SearchTree::with_root(&[ActionId(0)]);
        let a = t.child_or_insert(0, ActionId(0), 7, &[ActionId(0)]);
        let b = t.child_or_insert(0, ActionId(0), 8, &[]);
        assert_ne!(a, b);
        assert_eq!(t.child_or_insert(0, ActionId(0), 7, &[]), a);
        assert_eq!(t.len(), 3);
        assert!(t.node(b).is_terminal());
    }
}
