use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GraphError, Label, LabeledGraph, NodeId};

const MAX_RESAMPLES: usize = 100_000;

/// Graph families used by the experiments and the lower-bound constructions.
/// The source is always node 0.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    /// Simple path; the source is an extremity.
    Path(usize),
    Cycle(usize),
    /// Source labeled 0 and sink labeled `label_space - 1`, each adjacent to
    /// every member node. Labels are fixed by the construction.
    StarGs { members: Vec<u64>, label_space: u64 },
    /// A path of `path_len` edges from the source `a` to `b`, followed by `k`
    /// four-cycles chained by bridges: `b - a_1` and `c_i - a_{i+1}`.
    ChainGk { k: usize, path_len: usize },
    /// G(n, p) resampled until connected.
    RandomConnected { n: usize, p: f64, seed: u64 },
}

/// How labels are assigned to node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Labeling {
    /// Node `i` gets label `i`.
    Identity,
    /// Label of node `i` is `labels[i]`.
    Explicit(Vec<u64>),
    /// Distinct labels drawn from the label space with a seeded shuffle.
    Shuffled { seed: u64 },
}

fn invalid(msg: impl Into<String>) -> GraphError {
    GraphError::InvalidFamilyParams(msg.into())
}

/// Builds a graph of the requested family. `label_space` defaults to the
/// node count (or one more than the largest explicit label).
pub fn make_family(
    spec: &FamilySpec,
    labeling: &Labeling,
    label_space: Option<u64>,
    message_space: u64,
) -> Result<LabeledGraph, GraphError> {
    let (n, edges) = match spec {
        FamilySpec::Path(n) => {
            if *n < 2 {
                return Err(invalid("path needs at least 2 nodes"));
            }
            (*n, (1..*n).map(|i| (i - 1, i)).collect::<Vec<_>>())
        }
        FamilySpec::Cycle(n) => {
            if *n < 3 {
                return Err(invalid("cycle needs at least 3 nodes"));
            }
            let mut edges: Vec<_> = (1..*n).map(|i| (i - 1, i)).collect();
            edges.push((n - 1, 0));
            (*n, edges)
        }
        FamilySpec::StarGs { members, label_space: l } => {
            return star_gs(members, *l, labeling, label_space, message_space);
        }
        FamilySpec::ChainGk { k, path_len } => chain_gk(*k, *path_len)?,
        FamilySpec::RandomConnected { n, p, seed } => random_connected(*n, *p, *seed)?,
    };
    let (labels, l) = assign_labels(n, labeling, label_space)?;
    LabeledGraph::new(n, edges, labels, 0, l, message_space)
}

fn star_gs(
    members: &[u64],
    l: u64,
    labeling: &Labeling,
    label_space: Option<u64>,
    message_space: u64,
) -> Result<LabeledGraph, GraphError> {
    if *labeling != Labeling::Identity {
        return Err(invalid("star family labels are fixed by construction"));
    }
    if label_space.is_some_and(|ls| ls != l) {
        return Err(invalid("conflicting label space for star family"));
    }
    if l < 4 {
        return Err(invalid("star family needs L >= 4"));
    }
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != members.len() {
        return Err(invalid("duplicate member labels"));
    }
    if sorted.len() < 2 {
        return Err(invalid("member set must have size at least 2"));
    }
    if sorted.iter().any(|&x| x == 0 || x >= l - 1) {
        return Err(invalid(format!("member labels must lie in 1..={}", l - 2)));
    }
    let n = sorted.len() + 2;
    let sink = n - 1;
    let mut labels = vec![Label(0)];
    labels.extend(sorted.iter().map(|&x| Label(x)));
    labels.push(Label(l - 1));
    let mut edges = Vec::new();
    for i in 1..sink {
        edges.push((0, i));
        edges.push((i, sink));
    }
    LabeledGraph::new(n, edges, labels, 0, l, message_space)
}

fn chain_gk(k: usize, path_len: usize) -> Result<(usize, Vec<(NodeId, NodeId)>), GraphError> {
    if k == 0 {
        return Err(invalid("chain needs at least one cycle"));
    }
    if path_len == 0 {
        return Err(invalid("chain path needs at least one edge"));
    }
    let path_nodes = path_len + 1;
    let n = path_nodes + 4 * k;
    let mut edges: Vec<_> = (1..path_nodes).map(|i| (i - 1, i)).collect();
    for i in 0..k {
        let a = path_nodes + 4 * i;
        let (b, c, d) = (a + 1, a + 2, a + 3);
        edges.extend([(a, b), (b, c), (c, d), (d, a)]);
        if i == 0 {
            edges.push((path_len, a));
        } else {
            // c of the previous copy joins a of this copy
            edges.push((a - 2, a));
        }
    }
    Ok((n, edges))
}

fn random_connected(n: usize, p: f64, seed: u64) -> Result<(usize, Vec<(NodeId, NodeId)>), GraphError> {
    if n < 2 {
        return Err(invalid("random graph needs at least 2 nodes"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        if connected(n, &edges) {
            return Ok((n, edges));
        }
    }
    Err(invalid(format!(
        "no connected sample for n={n}, p={p} after {MAX_RESAMPLES} attempts"
    )))
}

fn connected(n: usize, edges: &[(NodeId, NodeId)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components == 1
}

fn assign_labels(
    n: usize,
    labeling: &Labeling,
    label_space: Option<u64>,
) -> Result<(Vec<Label>, u64), GraphError> {
    match labeling {
        Labeling::Identity => Ok(((0..n as u64).map(Label).collect(), label_space.unwrap_or(n as u64))),
        Labeling::Explicit(v) => {
            if v.len() != n {
                return Err(invalid(format!("{} labels given for {n} nodes", v.len())));
            }
            let l = label_space.unwrap_or_else(|| v.iter().max().map_or(0, |m| m + 1));
            let mut sorted = v.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid("duplicate labels"));
            }
            if let Some(bad) = v.iter().find(|&&x| x >= l) {
                return Err(invalid(format!("label {bad} not below L={l}")));
            }
            Ok((v.iter().map(|&x| Label(x)).collect(), l))
        }
        Labeling::Shuffled { seed } => {
            let l = label_space.unwrap_or(n as u64);
            if l < n as u64 {
                return Err(invalid(format!("label space {l} too small for {n} nodes")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let pool: Vec<u64> = (0..l).collect();
            let chosen: Vec<u64> = pool.choose_multiple(&mut rng, n).copied().collect();
            Ok((chosen.into_iter().map(Label).collect(), l))
        }
    }
}
