use super::tree::TreeNode;
use crate::error::{Error, Result};

pub fn uct_score(value: f64, parent_visits: u32, edge_visits: u32, exploration: f64) -> f64 {
    value + exploration * ((parent_visits as f64).ln() / edge_visits as f64).sqrt()
}

/// UCT with a prior bonus that decays with the edge visit count.
pub fn puct_score(
    value: f64,
    parent_visits: u32,
    edge_visits: u32,
    prior: f64,
    c_b: f64,
    c_pb: f64,
) -> f64 {
    uct_score(value, parent_visits, edge_visits, c_b) + c_pb * prior / (edge_visits as f64 + 1.0)
}

/// Index of the first maximum.
fn argmax(scores: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// UCT selection over a fully expanded node; ties go to the lowest index.
pub fn select_uct<S>(node: &TreeNode<S>, exploration: f64) -> Result<usize> {
    if let Some(a) = node.edges.iter().position(|e| e.visits == 0) {
        return Err(Error::contract(format!(
            "edge {a} has no visits; unvisited actions must be tried first"
        )));
    }
    argmax(
        node.edges
            .iter()
            .map(|e| uct_score(e.value, node.visits, e.visits, exploration)),
    )
    .ok_or_else(|| Error::contract("node has no actions"))
}

/// PUCT selection. Unvisited edges win outright (infinite exploration bonus);
/// among them the highest prior is taken.
pub fn select_puct<S>(node: &TreeNode<S>, prior: &[f64], c_b: f64, c_pb: f64) -> Result<usize> {
    if prior.len() != node.edges.len() {
        return Err(Error::contract(format!(
            "prior has {} entries for {} actions",
            prior.len(),
            node.edges.len()
        )));
    }
    let unvisited = node.edges.iter().any(|e| e.visits == 0);
    let scores = node.edges.iter().zip(prior).map(|(e, &p)| {
        if unvisited {
            if e.visits == 0 {
                p
            } else {
                f64::NEG_INFINITY
            }
        } else {
            puct_score(e.value, node.visits, e.visits, p, c_b, c_pb)
        }
    });
    argmax(scores).ok_or_else(|| Error::contract("node has no actions"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcts::tree::{EdgeStats, SearchTree, ROOT};

    fn node(values: &[f64], visits: &[u32]) -> TreeNode<()> {
        let mut t = SearchTree::new((), values.len(), false, 0);
        for a in 0..values.len() {
            t.add_child(ROOT, a, (), false);
        }
        let mut n = t.root().clone();
        for (a, (&v, &c)) in values.iter().zip(visits).enumerate() {
            n.edges[a] = EdgeStats { visits: c, value: v };
        }
        n.visits = visits.iter().sum();
        n
    }

    #[test]
    fn uct_ties_go_to_lowest_index() {
        let n = node(&[0.5; 15], &[3; 15]);
        assert_eq!(select_uct(&n, 1.4).unwrap(), 0);
    }

    #[test]
    fn uct_exploits_with_small_constant() {
        let mut q = [0.1; 15];
        q[0] = 0.9;
        assert_eq!(select_uct(&node(&q, &[4; 15]), 0.01).unwrap(), 0);
        q[0] = 0.1;
        q[9] = 0.9;
        assert_eq!(select_uct(&node(&q, &[4; 15]), 0.01).unwrap(), 9);
    }

    #[test]
    fn uct_prefers_least_visited_arm() {
        // brute-force check of all 15 scores
        let mut counts = [2u32; 15];
        counts[0] = 1;
        let mut n = node(&[0.5; 15], &counts);
        n.visits = 30;
        let scores: Vec<f64> = n.edges.iter().map(|e| uct_score(e.value, 30, e.visits, 1.0)).collect();
        assert!(scores[1..].iter().all(|&s| s < scores[0]));
        assert_eq!(select_uct(&n, 1.0).unwrap(), 0);
    }

    #[test]
    fn uct_rejects_unvisited() {
        let mut counts = [2u32; 15];
        counts[4] = 0;
        assert!(select_uct(&node(&[0.5; 15], &counts), 1.0).is_err());
    }

    #[test]
    fn puct_worked_example() {
        let s = puct_score(0.5, 8, 2, 0.3, 1.0, 1.0);
        assert!((s - 1.61966).abs() < 1e-4, "{s}");
    }

    #[test]
    fn puct_prior_breaks_equal_statistics() {
        let mut n = node(&[0.5; 15], &[2; 15]);
        n.visits = 30;
        let mut prior = [0.1 / 14.0; 15];
        prior[3] = 0.9;
        assert_eq!(select_puct(&n, &prior, 1.4, 1.0).unwrap(), 3);
    }

    #[test]
    fn puct_without_prior_weight_is_uct() {
        let q: Vec<f64> = (0..15).map(|i| ((i * 7) % 11) as f64 / 11.0).collect();
        let counts: Vec<u32> = (0..15).map(|i| 1 + (i * 5 % 7) as u32).collect();
        let n = node(&q, &counts);
        let mut prior = [0.0; 15];
        prior[12] = 1.0;
        for c in [0.1, 0.7, 1.4, 3.0] {
            assert_eq!(select_puct(&n, &prior, c, 0.0).unwrap(), select_uct(&n, c).unwrap());
        }
    }

    #[test]
    fn puct_unvisited_ordered_by_prior() {
        let mut counts = [3u32; 15];
        counts[2] = 0;
        counts[6] = 0;
        let n = node(&[0.9; 15], &counts);
        let mut prior = [0.05; 15];
        prior[6] = 0.2;
        assert_eq!(select_puct(&n, &prior, 1.0, 1.0).unwrap(), 6);
        prior[2] = 0.2;
        assert_eq!(select_puct(&n, &prior, 1.0, 1.0).unwrap(), 2);
    }

    #[test]
    fn puct_prior_dominates_with_large_weight() {
        let q: Vec<f64> = (0..15).map(|i| i as f64 / 15.0).collect();
        let n = node(&q, &[1; 15]);
        let prior: Vec<f64> = (0..15).map(|i| if i == 5 { 0.3 } else { 0.05 }).collect();
        assert_eq!(select_puct(&n, &prior, 1.4, 1e6).unwrap(), 5);
    }
}
