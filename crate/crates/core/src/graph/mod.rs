//! Labeled network graphs, the lower-bound graph families, and per-node
//! knowledge views.

mod families;
mod io;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

pub use families::{make_family, FamilySpec, Labeling};
pub use io::GraphParseError;

/// Internal node identity, independent of labels.
pub type NodeId = usize;

/// A node label from the label space `{0, .., L-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u64);

impl Label {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A broken graph invariant, as reported by [`LabeledGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    SelfLoop(NodeId),
    ParallelEdge(NodeId, NodeId),
    EndpointOutOfRange(NodeId),
    LabelCountMismatch { nodes: usize, labels: usize },
    DuplicateLabel(u64),
    LabelOutOfRange(u64),
    SourceOutOfRange(NodeId),
    EmptyMessageSpace,
    Disconnected,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "graph has no nodes"),
            Violation::SelfLoop(u) => write!(f, "self-loop at node {u}"),
            Violation::ParallelEdge(u, v) => write!(f, "parallel edge {u}-{v}"),
            Violation::EndpointOutOfRange(u) => write!(f, "edge endpoint {u} out of range"),
            Violation::LabelCountMismatch { nodes, labels } => {
                write!(f, "{labels} labels for {nodes} nodes")
            }
            Violation::DuplicateLabel(l) => write!(f, "duplicate label {l}"),
            Violation::LabelOutOfRange(l) => write!(f, "label {l} outside label space"),
            Violation::SourceOutOfRange(s) => write!(f, "source {s} is not a node"),
            Violation::EmptyMessageSpace => write!(f, "message space is empty"),
            Violation::Disconnected => write!(f, "graph is disconnected"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("invalid graph: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid family parameters: {0}")]
    InvalidFamilyParams(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Simple connected undirected graph with distinct labels and a designated
/// source.
///
/// Edges keep their insertion order so the text format round-trips exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
    labels: Vec<Label>,
    source: NodeId,
    label_space: u64,
    message_space: u64,
}

impl LabeledGraph {
    /// Builds a graph and checks every invariant.
    pub fn new(
        n: usize,
        edges: Vec<(NodeId, NodeId)>,
        labels: Vec<Label>,
        source: NodeId,
        label_space: u64,
        message_space: u64,
    ) -> Result<Self, GraphError> {
        let g = Self::new_unchecked(n, edges, labels, source, label_space, message_space);
        let violations = g.validate();
        if violations.is_empty() {
            Ok(g)
        } else {
            Err(GraphError::Invalid(violations))
        }
    }

    /// Builds a graph without validation. Out-of-range endpoints are kept in
    /// the edge list but left out of the adjacency lists.
    pub fn new_unchecked(
        n: usize,
        edges: Vec<(NodeId, NodeId)>,
        labels: Vec<Label>,
        source: NodeId,
        label_space: u64,
        message_space: u64,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            if u < n && v < n && u != v {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        LabeledGraph {
            n,
            edges,
            adjacency,
            labels,
            source,
            label_space,
            message_space,
        }
    }

    /// Returns every broken invariant; empty iff the graph is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n == 0 {
            out.push(Violation::Empty);
        }
        let mut seen = BTreeSet::new();
        for &(u, v) in &self.edges {
            if u >= self.n {
                out.push(Violation::EndpointOutOfRange(u));
                continue;
            }
            if v >= self.n {
                out.push(Violation::EndpointOutOfRange(v));
                continue;
            }
            if u == v {
                out.push(Violation::SelfLoop(u));
                continue;
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                out.push(Violation::ParallelEdge(key.0, key.1));
            }
        }
        if self.labels.len() != self.n {
            out.push(Violation::LabelCountMismatch {
                nodes: self.n,
                labels: self.labels.len(),
            });
        }
        let mut used = BTreeSet::new();
        for l in &self.labels {
            if l.0 >= self.label_space {
                out.push(Violation::LabelOutOfRange(l.0));
            }
            if !used.insert(*l) {
                out.push(Violation::DuplicateLabel(l.0));
            }
        }
        if self.n > 0 && self.source >= self.n {
            out.push(Violation::SourceOutOfRange(self.source));
        }
        if self.message_space == 0 {
            out.push(Violation::EmptyMessageSpace);
        }
        if self.n > 0 && !self.is_connected() {
            out.push(Violation::Disconnected);
        }
        out
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Neighbors of `u`, sorted by node id.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    pub fn are_adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn label(&self, u: NodeId) -> Label {
        self.labels[u]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn node_with_label(&self, label: Label) -> Option<NodeId> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn label_space(&self) -> u64 {
        self.label_space
    }

    pub fn message_space(&self) -> u64 {
        self.message_space
    }

    /// Same topology and labels with a different message space.
    pub fn with_message_space(mut self, message_space: u64) -> Self {
        self.message_space = message_space;
        self
    }

    /// Neighbor labels of `u` in strictly increasing order.
    pub fn neighbor_labels(&self, u: NodeId) -> Vec<Label> {
        let mut out: Vec<Label> = self.adjacency[u].iter().map(|&v| self.labels[v]).collect();
        out.sort_unstable();
        out
    }

    /// Neighbors of `u` ordered by increasing label.
    pub fn neighbors_by_label(&self, u: NodeId) -> Vec<NodeId> {
        let mut out = self.adjacency[u].clone();
        out.sort_unstable_by_key(|&v| self.labels[v]);
        out
    }
}

/// What a node knows a priori, ordered by increasing information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KnowledgeLevel {
    Anonymous,
    AdHoc,
    NeighborhoodAware,
    FullKnowledge,
}

/// The knowledge a single node is given at a particular level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeKnowledge {
    pub level: KnowledgeLevel,
    pub own_label: Option<Label>,
    pub neighbor_labels: Option<Vec<Label>>,
    /// The whole map; the source is `full_map.source()`.
    pub full_map: Option<LabeledGraph>,
}

impl NodeKnowledge {
    /// Projects this view down to a lower level.
    pub fn restrict(&self, level: KnowledgeLevel) -> NodeKnowledge {
        let level = level.min(self.level);
        NodeKnowledge {
            level,
            own_label: self.own_label.filter(|_| level >= KnowledgeLevel::AdHoc),
            neighbor_labels: self
                .neighbor_labels
                .clone()
                .filter(|_| level >= KnowledgeLevel::NeighborhoodAware),
            full_map: self
                .full_map
                .clone()
                .filter(|_| level >= KnowledgeLevel::FullKnowledge),
        }
    }
}

/// The knowledge node `u` of `g` has at `level`.
pub fn knowledge_view(g: &LabeledGraph, u: NodeId, level: KnowledgeLevel) -> NodeKnowledge {
    assert!(u < g.node_count(), "node {u} out of range");
    NodeKnowledge {
        level,
        own_label: (level >= KnowledgeLevel::AdHoc).then(|| g.label(u)),
        neighbor_labels: (level >= KnowledgeLevel::NeighborhoodAware).then(|| g.neighbor_labels(u)),
        full_map: (level >= KnowledgeLevel::FullKnowledge).then(|| g.clone()),
    }
}

/// Edges whose removal disconnects the graph, as `(min, max)` pairs.
pub fn bridges(g: &LabeledGraph) -> Vec<(NodeId, NodeId)> {
    // Iterative low-link DFS.
    let n = g.node_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut out = Vec::new();
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let mut stack: Vec<(NodeId, Option<NodeId>, usize)> = vec![(root, None, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (u, parent, ref mut idx)) = stack.last_mut() {
            if *idx < g.neighbors(u).len() {
                let v = g.neighbors(u)[*idx];
                *idx += 1;
                if Some(v) == parent {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, Some(u), 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(p) = parent {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        out.push((p.min(u), p.max(u)));
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}
