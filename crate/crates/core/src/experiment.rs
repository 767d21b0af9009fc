//! Experiment instances, sweeps and their CSV rows.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::adversary::AdversarySpec;
use crate::algorithms::{AlgoError, Algorithm};
use crate::analysis::{compare_bounds, predict_cost, AnalysisError};
use crate::codec::Message;
use crate::engine::{run, run_accelerated, EngineError, Outcome, Round, RunConfig, Termination};
use crate::graph::{make_family, FamilySpec, GraphError, LabeledGraph, Labeling};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("bad family spec {0:?}: expected path:N, cycle:N, random:N,P, star:L:A,B,... or chain:K,LEN")]
    BadFamily(String),
    #[error("bad labeling {0:?}: expected identity, shuffled or a comma-separated label list")]
    BadLabeling(String),
    #[error("bad engine mode {0:?}: expected reference, accelerated or auto")]
    BadMode(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Algo(#[from] AlgoError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A graph family whose random members draw their seed from the instance.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyTemplate {
    Path(usize),
    Cycle(usize),
    Random { n: usize, p: f64 },
    Star { label_space: u64, members: Vec<u64> },
    Chain { k: usize, path_len: usize },
}

impl FamilyTemplate {
    pub fn instantiate(&self, seed: u64) -> FamilySpec {
        match self {
            FamilyTemplate::Path(n) => FamilySpec::Path(*n),
            FamilyTemplate::Cycle(n) => FamilySpec::Cycle(*n),
            FamilyTemplate::Random { n, p } => FamilySpec::RandomConnected { n: *n, p: *p, seed },
            FamilyTemplate::Star { label_space, members } => {
                FamilySpec::StarGs { members: members.clone(), label_space: *label_space }
            }
            FamilyTemplate::Chain { k, path_len } => FamilySpec::ChainGk { k: *k, path_len: *path_len },
        }
    }
}

impl FromStr for FamilyTemplate {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExperimentError::BadFamily(s.to_string());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let nums = |t: &str| -> Result<Vec<u64>, ExperimentError> {
            t.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
        };
        Ok(match kind {
            "path" => FamilyTemplate::Path(rest.parse().map_err(|_| bad())?),
            "cycle" => FamilyTemplate::Cycle(rest.parse().map_err(|_| bad())?),
            "random" => {
                let (n, p) = rest.split_once(',').ok_or_else(bad)?;
                let p: f64 = p.trim().parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad());
                }
                FamilyTemplate::Random { n: n.trim().parse().map_err(|_| bad())?, p }
            }
            "star" => {
                let (l, members) = rest.split_once(':').ok_or_else(bad)?;
                FamilyTemplate::Star { label_space: l.parse().map_err(|_| bad())?, members: nums(members)? }
            }
            "chain" => match nums(rest)?[..] {
                [k, len] => FamilyTemplate::Chain { k: k as usize, path_len: len as usize },
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for FamilyTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTemplate::Path(n) => write!(f, "path:{n}"),
            FamilyTemplate::Cycle(n) => write!(f, "cycle:{n}"),
            FamilyTemplate::Random { n, p } => write!(f, "random:{n},{p}"),
            FamilyTemplate::Star { label_space, members } => {
                let m: Vec<String> = members.iter().map(u64::to_string).collect();
                write!(f, "star:{label_space}:{}", m.join(","))
            }
            FamilyTemplate::Chain { k, path_len } => write!(f, "chain:{k},{path_len}"),
        }
    }
}

/// `identity`, `shuffled` (seeded by the instance) or an explicit list.
pub fn parse_labeling(s: &str, seed: u64) -> Result<Labeling, ExperimentError> {
    match s {
        "identity" => Ok(Labeling::Identity),
        "shuffled" => Ok(Labeling::Shuffled { seed }),
        _ => s
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| ExperimentError::BadLabeling(s.to_string())))
            .collect::<Result<_, _>>()
            .map(Labeling::Explicit),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineMode {
    Reference,
    Accelerated,
    /// Accelerated for ad-hoc, reference otherwise.
    Auto,
}

impl EngineMode {
    pub fn accelerated_for(self, alg: &Algorithm) -> bool {
        match self {
            EngineMode::Reference => false,
            EngineMode::Accelerated => true,
            EngineMode::Auto => alg.prefers_accelerated(),
        }
    }
}

impl FromStr for EngineMode {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reference" => Ok(EngineMode::Reference),
            "accelerated" => Ok(EngineMode::Accelerated),
            "auto" => Ok(EngineMode::Auto),
            _ => Err(ExperimentError::BadMode(s.to_string())),
        }
    }
}

/// One fully specified run.
#[derive(Debug, Clone)]
pub struct Instance {
    pub algorithm: Algorithm,
    pub family: FamilyTemplate,
    /// Label assignment as written in the config; resolved with `seed`.
    pub labeling: String,
    pub label_space: Option<u64>,
    pub message_space: u64,
    pub message: u64,
    pub adversary: AdversarySpec,
    pub seed: u64,
    pub mode: EngineMode,
    pub max_rounds: Round,
    pub max_cost: u128,
}

impl Instance {
    pub fn new(algorithm: Algorithm, family: FamilyTemplate, message_space: u64, message: u64) -> Self {
        Instance {
            algorithm,
            family,
            labeling: "identity".into(),
            label_space: None,
            message_space,
            message,
            adversary: AdversarySpec::Sync,
            seed: 0,
            mode: EngineMode::Auto,
            max_rounds: 1 << 50,
            max_cost: 1 << 70,
        }
    }

    pub fn graph(&self) -> Result<LabeledGraph, ExperimentError> {
        let labeling = parse_labeling(&self.labeling, self.seed)?;
        Ok(make_family(&self.family.instantiate(self.seed), &labeling, self.label_space, self.message_space)?)
    }
}

/// One line of the results table. `simulated` is `None` for failed runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub algo: String,
    pub n: usize,
    pub e: usize,
    pub label_space: u64,
    pub message_space: u64,
    pub m: u64,
    pub predicted: Option<u128>,
    pub simulated: Option<u128>,
    pub rounds: Round,
    pub adversary: String,
    pub seed: u64,
}

pub const CSV_HEADER: [&str; 11] =
    ["algo", "n", "e", "L", "M", "m", "predicted", "simulated", "rounds", "adversary", "seed"];

impl Row {
    fn fields(&self) -> [String; 11] {
        [
            self.algo.clone(),
            self.n.to_string(),
            self.e.to_string(),
            self.label_space.to_string(),
            self.message_space.to_string(),
            self.m.to_string(),
            self.predicted.map_or_else(String::new, |p| p.to_string()),
            self.simulated.map_or_else(|| "FAIL".into(), |s| s.to_string()),
            self.rounds.to_string(),
            self.adversary.clone(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Debug)]
pub struct InstanceResult {
    pub row: Row,
    pub outcome: Outcome,
    /// Why the run counts as failed, if it does.
    pub failure: Option<String>,
}

impl InstanceResult {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs an instance; broadcast failures and cost mismatches are reported in
/// the result, configuration problems as errors.
pub fn run_instance(inst: &Instance) -> Result<InstanceResult, ExperimentError> {
    let g = inst.graph()?;
    let mut automata = inst.algorithm.build(&g, inst.message)?;
    let mut adversary = inst.adversary.build(inst.seed);
    let cfg = RunConfig::with_limits(inst.max_rounds, inst.max_cost);
    let outcome = if inst.mode.accelerated_for(&inst.algorithm) {
        run_accelerated(&g, &mut automata, adversary.as_mut(), &cfg)?
    } else {
        run(&g, &mut automata, adversary.as_mut(), &cfg)?
    };
    let prediction = match predict_cost(&inst.algorithm, &g, inst.message) {
        Ok(p) => Some(p),
        Err(AnalysisError::UnknownAlgorithm(_)) => None,
        Err(AnalysisError::Algo(e)) => return Err(e.into()),
        Err(e @ AnalysisError::CostMismatch { .. }) => unreachable!("{e}"),
    };
    let failure = if outcome.termination != Termination::Quiescent {
        Some(format!("run ended with {:?}", outcome.termination))
    } else if let Some((node, why)) = outcome.faults.first() {
        Some(format!("node {node} faulted: {why}"))
    } else if !outcome.all_output(Message::Int(inst.message)) {
        Some("not every node output the message".to_string())
    } else {
        prediction.as_ref().and_then(|p| compare_bounds(&outcome, p).err()).map(|e| e.to_string())
    };
    let row = Row {
        algo: inst.algorithm.to_string(),
        n: g.node_count(),
        e: g.edge_count(),
        label_space: g.label_space(),
        message_space: g.message_space(),
        m: inst.message,
        predicted: prediction.map(|p| p.exact_total),
        simulated: failure.is_none().then_some(outcome.cost),
        rounds: outcome.rounds_elapsed,
        adversary: inst.adversary.to_string(),
        seed: inst.seed,
    };
    Ok(InstanceResult { row, outcome, failure })
}

/// Runs instances in parallel; results keep the input order.
pub fn sweep(instances: &[Instance]) -> Vec<Result<InstanceResult, ExperimentError>> {
    instances.par_iter().map(run_instance).collect()
}

pub fn write_csv<'a, W: Write>(rows: impl IntoIterator<Item = &'a Row>, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}
