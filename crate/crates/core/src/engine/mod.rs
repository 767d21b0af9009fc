//! Round-driven execution of node automata against a delivery adversary.
//!
//! Each round every node either listens or sends one beep. The adversary
//! fixes a delivery round for every sent beep at send time; a beep reaches all
//! neighbors of its sender in that round. Per sender, delivery rounds are
//! strictly increasing in send order.
//!
//! [`run`] steps one round at a time. [`run_accelerated`] works on runs of
//! identical beeps and jumps across rounds in which nothing changes, which is
//! what makes exponentially long transmissions tractable.

mod accelerated;
mod reference;
mod trace;

pub use accelerated::run_accelerated;
pub use reference::run;
pub use trace::{Event, Record, Trace};

use crate::codec::{Beep, Message};
use crate::graph::NodeId;

pub type Round = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Listen,
    Send(Beep),
}

/// Run-level counterpart of [`Action`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunAction {
    /// Listen until something is heard, or until `wake` if set.
    Listen { wake: Option<Round> },
    /// Send `count >= 1` beeps of one kind in consecutive rounds.
    Send { kind: Beep, count: u64 },
}

/// A deterministic per-node protocol.
pub trait NodeAutomaton: Send {
    /// The node's action in `round`. Called once per round, before deliveries.
    fn step(&mut self, round: Round) -> Action;

    /// Called when the node listened in `round` and heard `beep`.
    fn on_hear(&mut self, round: Round, beep: Beep);

    /// Final output; once set it never changes.
    fn output(&self) -> Option<Message>;

    /// Whether the protocol still has work to do at this node.
    fn active(&self) -> bool;

    /// A future round at which the node may act without hearing anything.
    fn next_wake(&self) -> Option<Round> {
        None
    }

    /// Protocol-level anomaly (e.g. an undecodable frame).
    fn fault(&self) -> Option<String> {
        None
    }

    /// The run-length interface, if this automaton supports it.
    fn runs(&mut self) -> Option<&mut dyn RunAutomaton> {
        None
    }
}

/// Run-length extension used by [`run_accelerated`].
///
/// Contract, relative to the per-round interface of the same automaton:
/// - `next_run` is asked when the node is idle and was just created, finished
///   a send run, heard something, or reached its wake round. A `Send` run
///   matches `count` consecutive `step` results.
/// - `hear_budget(kind)` is how many consecutive hears of `kind` the node can
///   absorb before it might change its next action or its output. Output may
///   only change on the last beep of a batch passed to `on_hear_run`.
pub trait RunAutomaton {
    fn next_run(&mut self, round: Round) -> RunAction;
    fn hear_budget(&self, beep: Beep) -> u64;
    fn on_hear_run(&mut self, round: Round, beep: Beep, count: u64);
}

/// How simultaneous deliveries combine at a listening receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reception {
    /// Exactly one soft beep is heard as soft; anything else nonempty as loud.
    #[default]
    Bivalent,
    /// Beeps of uniform strength: anything nonempty is heard as one beep,
    /// reported as loud.
    Uniform,
}

/// What a node hears given the beeps delivered to it this round.
pub fn reception_rule(deliveries: &[Beep], receiver_action: Action) -> Option<Beep> {
    let soft = deliveries.iter().filter(|&&b| b == Beep::Soft).count() as u64;
    let loud = deliveries.len() as u64 - soft;
    hear(soft, loud, receiver_action == Action::Listen, Reception::Bivalent)
}

pub(crate) fn hear(soft: u64, loud: u64, listening: bool, mode: Reception) -> Option<Beep> {
    if !listening || soft + loud == 0 {
        return None;
    }
    match mode {
        Reception::Bivalent if soft == 1 && loud == 0 => Some(Beep::Soft),
        _ => Some(Beep::Loud),
    }
}

/// A sent beep together with its assigned delivery round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingBeep {
    pub sender: NodeId,
    pub seq: u64,
    pub kind: Beep,
    pub send_round: Round,
    pub delivery_round: Round,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleViolation {
    #[error("delivery scheduled before the send round")]
    TimeTravel,
    #[error("delivery not strictly after the sender's previous delivery")]
    FifoOrCollapse,
    #[error("delivery runs do not cover the sent run")]
    BadRunCover,
}

/// Checks one schedule against the adversary constraints, given the sender's
/// last delivery round so far.
pub fn validate_schedule(
    pending: &PendingBeep,
    last_delivery: Option<Round>,
) -> Result<(), ScheduleViolation> {
    if pending.delivery_round < pending.send_round {
        return Err(ScheduleViolation::TimeTravel);
    }
    if last_delivery.is_some_and(|last| pending.delivery_round <= last) {
        return Err(ScheduleViolation::FifoOrCollapse);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub max_rounds: Round,
    pub max_cost: u128,
    pub reception: Reception,
    /// End the run right after the round in which this node first outputs.
    pub stop_when_output: Option<NodeId>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_rounds: 10_000_000,
            max_cost: 1_000_000_000,
            reception: Reception::Bivalent,
            stop_when_output: None,
        }
    }
}

impl RunConfig {
    pub fn with_limits(max_rounds: Round, max_cost: u128) -> Self {
        RunConfig { max_rounds, max_cost, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Nothing pending and every node silent.
    Quiescent,
    RoundLimit,
    CostLimit,
    /// The `stop_when_output` node produced its output.
    Stopped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub outputs: Vec<Option<Message>>,
    pub output_rounds: Vec<Option<Round>>,
    /// Total beeps sent.
    pub cost: u128,
    pub sent_per_node: Vec<u128>,
    pub rounds_elapsed: Round,
    pub trace: Trace,
    pub termination: Termination,
    pub faults: Vec<(NodeId, String)>,
}

impl Outcome {
    pub fn all_output(&self, msg: Message) -> bool {
        self.outputs.iter().all(|o| *o == Some(msg))
    }

    pub fn completed(&self) -> bool {
        self.termination == Termination::Quiescent
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("adversary violated the model for node {sender} beep {seq}: {violation}")]
    AdversaryViolation {
        sender: NodeId,
        seq: u64,
        violation: ScheduleViolation,
    },
    #[error("automaton at node {0} has no run-length interface")]
    UnsupportedAutomaton(NodeId),
    #[error("{automata} automata for {nodes} nodes")]
    AutomataCount { automata: usize, nodes: usize },
    #[error("limits must be positive")]
    InvalidLimits,
    #[error("automaton at node {0} asked for an empty send run")]
    EmptyRun(NodeId),
}

/// Bookkeeping shared by both engines.
pub(crate) struct Ledger {
    pub outputs: Vec<Option<Message>>,
    pub output_rounds: Vec<Option<Round>>,
    pub heard: Vec<u64>,
    pub sent: Vec<u64>,
    pub last_delivery: Vec<Option<Round>>,
    pub cost: u128,
    pub trace: Trace,
}

impl Ledger {
    pub fn new(n: usize) -> Self {
        Ledger {
            outputs: vec![None; n],
            output_rounds: vec![None; n],
            heard: vec![0; n],
            sent: vec![0; n],
            last_delivery: vec![None; n],
            cost: 0,
            trace: Trace::new(),
        }
    }

    pub fn note_output(&mut self, node: NodeId, automaton: &dyn NodeAutomaton, round: Round) {
        if self.outputs[node].is_none() {
            if let Some(msg) = automaton.output() {
                self.outputs[node] = Some(msg);
                self.output_rounds[node] = Some(round);
                self.trace.push(round, 1, Event::Output { node, msg });
            }
        }
    }

    pub fn context<'a>(
        &'a self,
        round: Round,
        graph: &'a crate::graph::LabeledGraph,
    ) -> crate::adversary::ScheduleContext<'a> {
        crate::adversary::ScheduleContext {
            round,
            graph,
            heard: &self.heard,
            outputs: &self.outputs,
            trace: &self.trace,
        }
    }

    pub fn finish(
        mut self,
        automata: &[Box<dyn NodeAutomaton>],
        rounds_elapsed: Round,
        termination: Termination,
    ) -> Outcome {
        if termination == Termination::Stopped {
            self.trace.truncate_after(rounds_elapsed);
            for v in 0..self.outputs.len() {
                if self.output_rounds[v].is_some_and(|r| r > rounds_elapsed) {
                    self.outputs[v] = None;
                    self.output_rounds[v] = None;
                }
            }
        }
        let sent_per_node: Vec<u128> = if termination == Termination::Stopped {
            // the accelerated engine may have committed runs past the stop round
            (0..self.outputs.len())
                .map(|v| self.trace.sent_by(v, rounds_elapsed) as u128)
                .collect()
        } else {
            self.sent.iter().map(|&s| s as u128).collect()
        };
        let cost = if termination == Termination::Stopped {
            sent_per_node.iter().sum()
        } else {
            self.cost
        };
        let faults = automata
            .iter()
            .enumerate()
            .filter_map(|(v, a)| a.fault().map(|f| (v, f)))
            .collect();
        Outcome {
            outputs: self.outputs,
            output_rounds: self.output_rounds,
            cost,
            sent_per_node,
            rounds_elapsed,
            trace: self.trace,
            termination,
            faults,
        }
    }
}

pub(crate) fn check_setup(
    graph: &crate::graph::LabeledGraph,
    automata: &[Box<dyn NodeAutomaton>],
    cfg: &RunConfig,
) -> Result<(), EngineError> {
    if automata.len() != graph.node_count() {
        return Err(EngineError::AutomataCount {
            automata: automata.len(),
            nodes: graph.node_count(),
        });
    }
    if cfg.max_rounds == 0 || cfg.max_cost == 0 {
        return Err(EngineError::InvalidLimits);
    }
    Ok(())
}
