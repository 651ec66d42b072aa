/// Index of a node inside a [`SearchTree`].
pub type NodeId = usize;

pub const ROOT: NodeId = 0;

/// Statistics of one (state, action) edge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EdgeStats {
    /// `N(s,a)`
    pub visits: u32,
    /// `Q(s,a)`, running mean of every value backed up through the edge.
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct TreeNode<S> {
    pub state: S,
    /// `N(s)`: edge visits plus the rollouts started at this node.
    pub visits: u32,
    pub edges: Vec<EdgeStats>,
    pub children: Vec<Option<NodeId>>,
    pub expanded: usize,
    pub terminal: bool,
    pub depth: u32,
    /// Position in a breadth-first enumeration of the complete action tree.
    pub tree_index: u64,
    /// Action probabilities, filled by guided search.
    pub prior: Option<Vec<f64>>,
}

impl<S> TreeNode<S> {
    pub fn is_fully_expanded(&self) -> bool {
        self.expanded == self.children.len()
    }

    pub fn untried_actions(&self) -> impl Iterator<Item = usize> + '_ {
        self.children
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_none())
            .map(|(a, _)| a)
    }
}

/// Breadth-first index of child `action` of the node with index `parent`
/// in a complete tree with the given branching factor.
pub fn child_tree_index(parent: u64, action: usize, branching: usize) -> u64 {
    parent
        .saturating_mul(branching as u64)
        .saturating_add(1 + action as u64)
}

/// Arena-backed search tree; the root is always node 0.
#[derive(Debug, Clone)]
pub struct SearchTree<S> {
    nodes: Vec<TreeNode<S>>,
    branching: usize,
}

impl<S> SearchTree<S> {
    pub fn new(root: S, branching: usize, terminal: bool, depth: u32) -> Self {
        SearchTree {
            nodes: vec![Self::make_node(root, branching, terminal, depth, 0)],
            branching,
        }
    }

    fn make_node(state: S, branching: usize, terminal: bool, depth: u32, index: u64) -> TreeNode<S> {
        TreeNode {
            state,
            visits: 0,
            edges: vec![EdgeStats::default(); branching],
            children: vec![None; branching],
            expanded: 0,
            terminal,
            depth,
            tree_index: index,
            prior: None,
        }
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &TreeNode<S> {
        &self.nodes[ROOT]
    }

    pub fn node(&self, id: NodeId) -> &TreeNode<S> {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut TreeNode<S> {
        &mut self.nodes[id]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode<S>> {
        self.nodes.iter()
    }

    pub fn add_child(&mut self, parent: NodeId, action: usize, state: S, terminal: bool) -> NodeId {
        let id = self.nodes.len();
        let depth = self.nodes[parent].depth + 1;
        let index = child_tree_index(self.nodes[parent].tree_index, action, self.branching);
        self.nodes
            .push(Self::make_node(state, self.branching, terminal, depth, index));
        let p = &mut self.nodes[parent];
        debug_assert!(p.children[action].is_none());
        p.children[action] = Some(id);
        p.expanded += 1;
        id
    }

    /// Adds one sample of `value` to every edge on `path` (root first).
    pub fn backpropagate(&mut self, path: &[(NodeId, usize)], value: f64) {
        for &(id, action) in path {
            let node = &mut self.nodes[id];
            node.visits += 1;
            let edge = &mut node.edges[action];
            edge.visits += 1;
            edge.value += (value - edge.value) / edge.visits as f64;
        }
    }

    /// Counts a rollout started at `id` itself.
    pub fn record_rollout(&mut self, id: NodeId) {
        self.nodes[id].visits += 1;
    }

    /// Most visited root action, then higher value, then lower index.
    pub fn best_root_action(&self) -> Option<usize> {
        let root = self.root();
        root.children
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some())
            .map(|(a, _)| (a, root.edges[a]))
            .max_by(|(a1, e1), (a2, e2)| {
                e1.visits
                    .cmp(&e2.visits)
                    .then(e1.value.total_cmp(&e2.value))
                    .then(a2.cmp(a1))
            })
            .map(|(a, _)| a)
    }
}
