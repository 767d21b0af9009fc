//! Exact cost predictions and their comparison with simulated runs.

use crate::algorithms::{build_spanning_tree, AlgoError, Algorithm, MAX_PACK};
use crate::codec::{frame_len, Message};
use crate::engine::Outcome;
use crate::graph::LabeledGraph;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("no cost prediction for algorithm {0}")]
    UnknownAlgorithm(String),
    #[error(transparent)]
    Algo(#[from] AlgoError),
    #[error("simulated cost {simulated} differs from the predicted {predicted}")]
    CostMismatch { predicted: u128, simulated: u128 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostPrediction {
    pub exact_total: u128,
    /// Beeps sent by each node, indexed by node id.
    pub per_node: Vec<u128>,
    pub bound_class: &'static str,
    /// The symbolic bound evaluated with unit constants.
    pub bound_value: f64,
}

fn log2_at_least_one(x: u64) -> f64 {
    (x.max(2) as f64).log2()
}

/// Beeps each node sends when broadcasting `m` on `g`.
pub fn predict_cost(alg: &Algorithm, g: &LabeledGraph, m: u64) -> Result<CostPrediction, AnalysisError> {
    if m >= g.message_space() {
        return Err(AlgoError::MessageOutOfRange { message: m, space: g.message_space() }.into());
    }
    let n = g.node_count();
    let (per_node, bound_class, bound_value) = match alg {
        Algorithm::AdHoc(tag) => {
            let packing = tag.resolve(g);
            let per_node = g
                .labels()
                .iter()
                .map(|l| {
                    let pack = packing.pack(l.0, m).map_err(AlgoError::from)?;
                    if pack > MAX_PACK {
                        return Err(AlgoError::PackTooLarge { label: l.0, message: m, pack }.into());
                    }
                    Ok(2 * 8u128.pow(pack as u32))
                })
                .collect::<Result<Vec<_>, AnalysisError>>()?;
            let lm = (g.label_space() + g.message_space()) as f64;
            (per_node, "2^O((L+M)^2)", (lm * lm).exp2())
        }
        Algorithm::NeighborhoodAware => {
            let tree = build_spanning_tree(g);
            let mut per_node = vec![frame_len(Message::Int(m)) as u128; n];
            for u in 0..n {
                let (lu, pu) = (g.label(u).0, tree.parent[u]);
                for &v in g.neighbors(u) {
                    if Some(v) == pu {
                        continue;
                    }
                    // u hands the token to v, which answers with a return or a refusal
                    let lv = g.label(v).0;
                    per_node[u] += frame_len(Message::Triple(lu, lv, 0)) as u128;
                    per_node[v] += frame_len(Message::Triple(lv, lu, 1)) as u128;
                }
            }
            let e = g.edge_count() as f64;
            let bound =
                n as f64 * log2_at_least_one(g.message_space()) + e * log2_at_least_one(g.label_space());
            (per_node, "O(n log M + e log L)", bound)
        }
        Algorithm::FullKnowledge => {
            let tree = build_spanning_tree(g);
            let len = frame_len(Message::Int(m)) as u128;
            // one frame per Euler step: a node sends once per tree edge it is an endpoint of
            let per_node = (0..n)
                .map(|u| (tree.children[u].len() + tree.parent[u].is_some() as usize) as u128 * len)
                .collect();
            (per_node, "O(n log M)", n as f64 * log2_at_least_one(g.message_space()))
        }
        Algorithm::Unary { .. } => return Err(AnalysisError::UnknownAlgorithm(alg.to_string())),
    };
    Ok(CostPrediction { exact_total: per_node.iter().sum(), per_node, bound_class, bound_value })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub cost: u128,
    pub bound_class: &'static str,
    /// Simulated cost over the unit-constant bound.
    pub ratio: f64,
}

/// Checks a completed run against its prediction.
pub fn compare_bounds(outcome: &Outcome, prediction: &CostPrediction) -> Result<BoundReport, AnalysisError> {
    if outcome.cost != prediction.exact_total {
        return Err(AnalysisError::CostMismatch { predicted: prediction.exact_total, simulated: outcome.cost });
    }
    Ok(BoundReport {
        cost: outcome.cost,
        bound_class: prediction.bound_class,
        ratio: outcome.cost as f64 / prediction.bound_value,
    })
}
