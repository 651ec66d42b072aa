//! Domain-independent MCTS loop: selection through fully expanded nodes,
//! threshold-gated single-child expansion, random rollouts and undiscounted
//! backpropagation of the rollout's final-state value.

use rand::Rng;

use super::select::select_uct;
use super::tree::{NodeId, SearchTree, ROOT};
use crate::error::{Error, Result};

/// A deterministic planning problem over a fixed, finite action set.
pub trait SearchDomain {
    type State: Clone;

    fn num_actions(&self) -> usize;

    fn is_terminal(&self, s: &Self::State) -> bool;

    /// Steps separating `s` from the search root.
    fn depth(&self, s: &Self::State) -> u32;

    fn step(&self, s: &Self::State, action: usize) -> Self::State;

    fn step_in_place(&self, s: &mut Self::State, action: usize) {
        *s = self.step(s, action);
    }

    /// Value backed up for a rollout that ended in `s`.
    fn evaluate(&self, s: &Self::State) -> Result<f64>;

    /// Returned when the budget ends before the root has any child.
    fn fallback_action(&self) -> usize {
        0
    }
}

/// Picks the edge to descend through at a fully expanded node.
pub trait SelectionRule<S> {
    fn select(&mut self, tree: &mut SearchTree<S>, node: NodeId) -> Result<usize>;
}

#[derive(Debug, Clone, Copy)]
pub struct Uct {
    pub exploration: f64,
}

impl<S> SelectionRule<S> for Uct {
    fn select(&mut self, tree: &mut SearchTree<S>, node: NodeId) -> Result<usize> {
        select_uct(tree.node(node), self.exploration)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub iterations: u32,
    /// Visits a leaf needs before its first child is created.
    pub min_visits: u32,
    /// Cap on depth from the root, shared by tree and rollout.
    pub max_depth: u32,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome<S> {
    pub action: usize,
    pub tree: SearchTree<S>,
}

/// Applies uniformly random actions until `s` is terminal or reaches `max_depth`.
pub fn random_rollout<D: SearchDomain, R: Rng + ?Sized>(
    domain: &D,
    s: &mut D::State,
    max_depth: u32,
    rng: &mut R,
) {
    let n = domain.num_actions();
    while !domain.is_terminal(s) && domain.depth(s) < max_depth {
        let a = rng.random_range(0..n);
        domain.step_in_place(s, a);
    }
}

pub fn run_search<D, Sel, R>(
    domain: &D,
    root: D::State,
    budget: &SearchBudget,
    rule: &mut Sel,
    rng: &mut R,
) -> Result<SearchOutcome<D::State>>
where
    D: SearchDomain,
    Sel: SelectionRule<D::State>,
    R: Rng + ?Sized,
{
    if domain.is_terminal(&root) {
        return Err(Error::contract("cannot plan from a terminal state"));
    }
    if budget.iterations == 0 || budget.min_visits == 0 || budget.max_depth == 0 {
        return Err(Error::config(
            "iterations, min_visits and max_depth must be at least 1",
        ));
    }
    let root_depth = domain.depth(&root);
    let mut tree = SearchTree::new(root, domain.num_actions(), false, root_depth);
    let mut path: Vec<(NodeId, usize)> = Vec::with_capacity(budget.max_depth as usize + 1);

    for _ in 0..budget.iterations {
        path.clear();
        let mut node = ROOT;
        loop {
            let n = tree.node(node);
            if n.terminal || n.depth >= budget.max_depth || !n.is_fully_expanded() {
                break;
            }
            let a = rule.select(&mut tree, node)?;
            path.push((node, a));
            node = tree.node(node).children[a].expect("fully expanded node has every child");
        }

        let n = tree.node(node);
        let (leaf, final_state) = if n.terminal || n.depth >= budget.max_depth {
            // Nothing to expand or simulate; re-sample the node itself.
            (node, n.state.clone())
        } else if n.visits >= budget.min_visits {
            let untried: Vec<usize> = n.untried_actions().collect();
            let a = untried[rng.random_range(0..untried.len())];
            let child_state = domain.step(&n.state, a);
            let terminal = domain.is_terminal(&child_state);
            let child = tree.add_child(node, a, child_state.clone(), terminal);
            path.push((node, a));
            let mut s = child_state;
            random_rollout(domain, &mut s, budget.max_depth, rng);
            (child, s)
        } else {
            let mut s = n.state.clone();
            random_rollout(domain, &mut s, budget.max_depth, rng);
            (node, s)
        };

        let value = domain.evaluate(&final_state)?;
        tree.backpropagate(&path, value);
        tree.record_rollout(leaf);
    }

    let action = tree
        .best_root_action()
        .unwrap_or_else(|| domain.fallback_action());
    Ok(SearchOutcome { action, tree })
}
