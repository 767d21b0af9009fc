//! Canonical spanning tree, its Euler sequence, and Full-knowledge wait counts.

use crate::graph::{Label, LabeledGraph, NodeId};

/// Spanning tree rooted at the source. Children are sorted by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    pub root: NodeId,
    pub parent: Vec<Option<NodeId>>,
    pub children: Vec<Vec<NodeId>>,
}

impl SpanningTree {
    /// Tree edges as `(parent, child)` pairs.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out: Vec<_> = (0..self.parent.len())
            .filter_map(|v| self.parent[v].map(|p| (p, v)))
            .collect();
        out.sort_unstable();
        out
    }
}

/// DFS from the source, exploring neighbors in increasing label order.
pub fn build_spanning_tree(g: &LabeledGraph) -> SpanningTree {
    let n = g.node_count();
    let root = g.source();
    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut visited = vec![false; n];
    let order: Vec<Vec<NodeId>> = (0..n).map(|u| g.neighbors_by_label(u)).collect();
    let mut stack = vec![(root, 0usize)];
    visited[root] = true;
    while let Some(&mut (u, ref mut next)) = stack.last_mut() {
        if let Some(&v) = order[u].get(*next) {
            *next += 1;
            if !visited[v] {
                visited[v] = true;
                parent[v] = Some(u);
                children[u].push(v);
                stack.push((v, 0));
            }
        } else {
            stack.pop();
        }
    }
    SpanningTree { root, parent, children }
}

/// Labels of the nodes performing each edge traversal of a depth-first walk
/// of the tree: `2(n-1)` entries.
pub fn euler_sequence(tree: &SpanningTree, g: &LabeledGraph) -> Vec<u64> {
    let mut seq = Vec::with_capacity(2 * tree.parent.len().saturating_sub(1));
    let mut stack = vec![(tree.root, 0usize)];
    while let Some(&mut (u, ref mut next)) = stack.last_mut() {
        if let Some(&c) = tree.children[u].get(*next) {
            *next += 1;
            seq.push(g.label(u).0);
            stack.push((c, 0));
        } else {
            stack.pop();
            if stack.last().is_some() {
                seq.push(g.label(u).0);
            }
        }
    }
    seq
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("label {0} does not occur in the sequence or graph")]
    LabelAbsent(u64),
}

/// Positions `i_1 < ... < i_r` (1-based) of `label` in `euler`, and the totals
/// `y_k`: how many entries before `i_k`, excluding the node's own, belong to
/// graph neighbors of `label`.
pub fn compute_wait_counts(
    euler: &[u64],
    g: &LabeledGraph,
    label: u64,
) -> Result<(Vec<usize>, Vec<u64>), TreeError> {
    let me = g.node_with_label(Label(label)).ok_or(TreeError::LabelAbsent(label))?;
    let adjacent = |a: u64| g.node_with_label(Label(a)).is_some_and(|v| g.are_adjacent(me, v));
    let mut positions = Vec::new();
    let mut totals = Vec::new();
    let mut count = 0u64;
    for (j, &a) in euler.iter().enumerate() {
        if a == label {
            positions.push(j + 1);
            totals.push(count);
        } else if adjacent(a) {
            count += 1;
        }
    }
    if positions.is_empty() {
        return Err(TreeError::LabelAbsent(label));
    }
    Ok((positions, totals))
}
