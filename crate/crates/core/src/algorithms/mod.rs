//! Broadcasting protocols as node automata.

mod adhoc;
mod frames;
mod full;
mod neighborhood;
pub mod pairing;
mod strawman;
pub mod tree;

use std::fmt;
use std::str::FromStr;

pub use adhoc::{adhoc_beep_count, AdHocNode, Phase as AdHocPhase};
pub use full::FullKnowledgeNode;
pub use neighborhood::NeighborhoodAwareNode;
pub use pairing::{
    adhoc_try_decode, adhoc_try_decode_with, pack_known, snake_phi, snake_phi_inverse, DecodeError,
    Known, PackError, Packing, MAX_PACK,
};
pub use strawman::UnaryRelay;
pub use tree::{build_spanning_tree, compute_wait_counts, euler_sequence, SpanningTree, TreeError};

use crate::engine::NodeAutomaton;
use crate::graph::{knowledge_view, KnowledgeLevel, LabeledGraph, NodeKnowledge};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgoError {
    #[error("label {label} with message {message} packs to {pack}; counts above 8^20 are not supported")]
    PackTooLarge { label: u64, message: u64, pack: u64 },
    #[error(transparent)]
    Pack(#[from] PackError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("message {message} outside the message space of size {space}")]
    MessageOutOfRange { message: u64, space: u64 },
    #[error("the protocol needs {needed:?} knowledge, the node has {given:?}")]
    MissingKnowledge { needed: KnowledgeLevel, given: KnowledgeLevel },
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
}

fn need(k: &NodeKnowledge, level: KnowledgeLevel) -> Result<(), AlgoError> {
    if k.level < level {
        return Err(AlgoError::MissingKnowledge { needed: level, given: k.level });
    }
    Ok(())
}

/// Ad-hoc node; `message` is set only at the source.
pub fn make_adhoc(
    k: &NodeKnowledge,
    message: Option<u64>,
    packing: Packing,
) -> Result<AdHocNode, AlgoError> {
    need(k, KnowledgeLevel::AdHoc)?;
    AdHocNode::new(k.own_label.expect("ad-hoc view has a label").0, message, packing)
}

pub fn make_neighborhood_aware(
    k: &NodeKnowledge,
    message: Option<u64>,
) -> Result<NeighborhoodAwareNode, AlgoError> {
    need(k, KnowledgeLevel::NeighborhoodAware)?;
    let neighbors = k.neighbor_labels.as_ref().expect("view has neighbor labels");
    Ok(NeighborhoodAwareNode::new(
        k.own_label.expect("view has a label").0,
        neighbors.iter().map(|l| l.0).collect(),
        message,
    ))
}

pub fn make_full_knowledge(
    k: &NodeKnowledge,
    message: Option<u64>,
) -> Result<FullKnowledgeNode, AlgoError> {
    need(k, KnowledgeLevel::FullKnowledge)?;
    let map = k.full_map.as_ref().expect("view has the map");
    Ok(FullKnowledgeNode::new(map, k.own_label.expect("view has a label").0, message)?)
}

/// Ad-hoc packing choice, resolved against the graph's sizes at build time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PackingTag {
    Phi,
    PsiL,
    PsiM,
}

impl PackingTag {
    pub fn resolve(self, g: &LabeledGraph) -> Packing {
        match self {
            PackingTag::Phi => Packing::Phi,
            PackingTag::PsiL => Packing::PsiL(g.label_space()),
            PackingTag::PsiM => Packing::PsiM(g.message_space()),
        }
    }
}

/// A protocol selectable by tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Algorithm {
    AdHoc(PackingTag),
    NeighborhoodAware,
    FullKnowledge,
    /// The unary strawman; `None` means `counts[m] = m + 1`.
    Unary { counts: Option<Vec<u64>>, patience: u64 },
}

impl Algorithm {
    pub fn knowledge(&self) -> KnowledgeLevel {
        match self {
            Algorithm::AdHoc(_) => KnowledgeLevel::AdHoc,
            Algorithm::NeighborhoodAware => KnowledgeLevel::NeighborhoodAware,
            Algorithm::FullKnowledge => KnowledgeLevel::FullKnowledge,
            Algorithm::Unary { .. } => KnowledgeLevel::Anonymous,
        }
    }

    pub fn unary(counts: Vec<u64>) -> Self {
        Algorithm::Unary { counts: Some(counts), patience: UnaryRelay::DEFAULT_PATIENCE }
    }

    /// Whether the run-length engine handles this protocol efficiently.
    pub fn prefers_accelerated(&self) -> bool {
        matches!(self, Algorithm::AdHoc(_))
    }

    fn unary_counts(counts: &Option<Vec<u64>>, space: u64) -> Vec<u64> {
        counts.clone().unwrap_or_else(|| (1..=space).collect())
    }

    /// One automaton per node of `g`, the source holding `message`.
    pub fn build(&self, g: &LabeledGraph, message: u64) -> Result<Vec<Box<dyn NodeAutomaton>>, AlgoError> {
        let space = match self {
            Algorithm::Unary { counts: Some(c), .. } => c.len() as u64,
            _ => g.message_space(),
        };
        if message >= space {
            return Err(AlgoError::MessageOutOfRange { message, space });
        }
        (0..g.node_count())
            .map(|u| {
                let k = knowledge_view(g, u, self.knowledge());
                let m = (u == g.source()).then_some(message);
                Ok(match self {
                    Algorithm::AdHoc(p) => Box::new(make_adhoc(&k, m, p.resolve(g))?) as Box<dyn NodeAutomaton>,
                    Algorithm::NeighborhoodAware => Box::new(make_neighborhood_aware(&k, m)?),
                    Algorithm::FullKnowledge => Box::new(make_full_knowledge(&k, m)?),
                    Algorithm::Unary { counts, patience } => Box::new(UnaryRelay::new(
                        Self::unary_counts(counts, g.message_space()),
                        *patience,
                        m,
                    )),
                })
            })
            .collect()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::AdHoc(PackingTag::Phi) => write!(f, "adhoc"),
            Algorithm::AdHoc(PackingTag::PsiL) => write!(f, "adhoc-psi-l"),
            Algorithm::AdHoc(PackingTag::PsiM) => write!(f, "adhoc-psi-m"),
            Algorithm::NeighborhoodAware => write!(f, "na"),
            Algorithm::FullKnowledge => write!(f, "fk"),
            Algorithm::Unary { counts: None, .. } => write!(f, "unary"),
            Algorithm::Unary { counts: Some(c), .. } => {
                let parts: Vec<String> = c.iter().map(u64::to_string).collect();
                write!(f, "unary:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Algorithm {
    type Err = AlgoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || AlgoError::UnknownAlgorithm(s.to_string());
        Ok(match s {
            "adhoc" => Algorithm::AdHoc(PackingTag::Phi),
            "adhoc-psi-l" => Algorithm::AdHoc(PackingTag::PsiL),
            "adhoc-psi-m" => Algorithm::AdHoc(PackingTag::PsiM),
            "na" => Algorithm::NeighborhoodAware,
            "fk" => Algorithm::FullKnowledge,
            "unary" | "echo" => Algorithm::Unary { counts: None, patience: UnaryRelay::DEFAULT_PATIENCE },
            _ => {
                let list = s.strip_prefix("unary:").ok_or_else(unknown)?;
                let counts: Vec<u64> = list
                    .split(',')
                    .map(|c| c.trim().parse().map_err(|_| unknown()))
                    .collect::<Result<_, _>>()?;
                if counts.is_empty() || counts[0] == 0 || counts.windows(2).any(|w| w[0] > w[1]) {
                    return Err(unknown());
                }
                Algorithm::unary(counts)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for tag in ["adhoc", "adhoc-psi-l", "adhoc-psi-m", "na", "fk", "unary", "unary:3,5"] {
            assert_eq!(tag.parse::<Algorithm>().unwrap().to_string(), tag);
        }
        assert_eq!("echo".parse::<Algorithm>().unwrap().to_string(), "unary");
        assert!("unary:5,3".parse::<Algorithm>().is_err());
        assert!("bfs".parse::<Algorithm>().is_err());
    }

    #[test]
    fn knowledge_is_enforced() {
        let g = crate::graph::make_family(
            &crate::graph::FamilySpec::Path(2),
            &crate::graph::Labeling::Identity,
            None,
            2,
        )
        .unwrap();
        let k = knowledge_view(&g, 0, KnowledgeLevel::AdHoc);
        assert!(matches!(make_full_knowledge(&k, Some(0)), Err(AlgoError::MissingKnowledge { .. })));
        assert!(make_adhoc(&k, Some(0), Packing::Phi).is_ok());
        assert!(matches!(
            Algorithm::FullKnowledge.build(&g, 2),
            Err(AlgoError::MessageOutOfRange { .. })
        ));
    }
}
