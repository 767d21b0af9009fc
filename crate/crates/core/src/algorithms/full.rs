use crate::codec::{Beep, Message};
use crate::engine::{Action, NodeAutomaton, Round, RunAction, RunAutomaton};
use crate::graph::LabeledGraph;

use super::frames::FrameIo;
use super::tree::{build_spanning_tree, compute_wait_counts, euler_sequence, TreeError};

/// A node that knows the whole labeled map.
///
/// Every node derives the same Euler sequence of the canonical tree. A node
/// sends `[m]` once per occurrence in the sequence, the `k`-th time after it
/// has decoded `y_k` copies of `[m]` from its neighbors.
#[derive(Debug, Clone)]
pub struct FullKnowledgeNode {
    wait_totals: Vec<u64>,
    next_slot: usize,
    heard_frames: u64,
    message: Option<u64>,
    io: FrameIo,
}

impl FullKnowledgeNode {
    pub fn new(map: &LabeledGraph, label: u64, message: Option<u64>) -> Result<Self, TreeError> {
        let wait_totals = if map.node_count() < 2 {
            Vec::new()
        } else {
            let euler = euler_sequence(&build_spanning_tree(map), map);
            compute_wait_counts(&euler, map, label)?.1
        };
        let mut node = FullKnowledgeNode {
            wait_totals,
            next_slot: 0,
            heard_frames: 0,
            message,
            io: FrameIo::default(),
        };
        node.release();
        Ok(node)
    }

    pub fn wait_totals(&self) -> &[u64] {
        &self.wait_totals
    }

    /// Queues every send whose wait total has been reached.
    fn release(&mut self) {
        let Some(m) = self.message else { return };
        while self.wait_totals.get(self.next_slot).is_some_and(|&y| y <= self.heard_frames) {
            self.io.enqueue(Message::Int(m));
            self.next_slot += 1;
        }
    }

    fn hear(&mut self, beep: Beep) {
        match self.io.feed(beep) {
            Some(Message::Int(m)) => {
                self.message.get_or_insert(m);
                self.heard_frames += 1;
                self.release();
            }
            Some(other) => self.io.set_fault(format!("unexpected frame {other}")),
            None => {}
        }
    }
}

impl NodeAutomaton for FullKnowledgeNode {
    fn step(&mut self, _round: Round) -> Action {
        self.io.step()
    }

    fn on_hear(&mut self, _round: Round, beep: Beep) {
        self.hear(beep);
    }

    fn output(&self) -> Option<Message> {
        self.message.map(Message::Int)
    }

    fn active(&self) -> bool {
        self.next_slot < self.wait_totals.len() || self.io.sending()
    }

    fn fault(&self) -> Option<String> {
        self.io.fault()
    }

    fn runs(&mut self) -> Option<&mut dyn RunAutomaton> {
        Some(self)
    }
}

impl RunAutomaton for FullKnowledgeNode {
    fn next_run(&mut self, _round: Round) -> RunAction {
        match self.io.next_send_run() {
            Some((kind, count)) => RunAction::Send { kind, count },
            None => RunAction::Listen { wake: None },
        }
    }

    fn hear_budget(&self, beep: Beep) -> u64 {
        self.io.hear_budget(beep)
    }

    fn on_hear_run(&mut self, _round: Round, beep: Beep, count: u64) {
        for _ in 0..count {
            self.hear(beep);
        }
    }
}
