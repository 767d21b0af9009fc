use crate::codec::{Beep, Message};
use crate::engine::{Action, NodeAutomaton, Round, RunAction, RunAutomaton};

use super::frames::FrameIo;

/// A node that knows its label and its neighbors' labels.
///
/// Runs a depth-first token walk. On receiving the token `[a, me, 0]` for the
/// first time the node sends `[m]`, then forwards `[me, b, 0]` to each
/// neighbor `b != a` in increasing label order, waiting for `[b, me, 1]` after
/// each, and finally returns `[me, a, 1]`. Any later token is refused at once
/// with `[me, b, 1]`.
#[derive(Debug, Clone)]
pub struct NeighborhoodAwareNode {
    label: u64,
    neighbors: Vec<u64>,
    is_source: bool,
    message: Option<u64>,
    parent: Option<u64>,
    /// Remaining forward targets, in increasing order.
    targets: Vec<u64>,
    next_target: usize,
    waiting_for: Option<u64>,
    started: bool,
    finished: bool,
    io: FrameIo,
}

impl NeighborhoodAwareNode {
    pub fn new(label: u64, mut neighbors: Vec<u64>, message: Option<u64>) -> Self {
        neighbors.sort_unstable();
        let mut node = NeighborhoodAwareNode {
            label,
            neighbors,
            is_source: message.is_some(),
            message,
            parent: None,
            targets: Vec::new(),
            next_target: 0,
            waiting_for: None,
            started: false,
            finished: false,
            io: FrameIo::default(),
        };
        if node.is_source {
            node.spread(None);
        }
        node
    }

    fn spread(&mut self, parent: Option<u64>) {
        let Some(m) = self.message else {
            self.io.set_fault(format!("token reached node {} before the message", self.label));
            return;
        };
        self.started = true;
        self.parent = parent;
        self.targets = self.neighbors.iter().copied().filter(|&b| Some(b) != parent).collect();
        self.io.enqueue(Message::Int(m));
        self.forward_next();
    }

    fn forward_next(&mut self) {
        if let Some(&b) = self.targets.get(self.next_target) {
            self.next_target += 1;
            self.waiting_for = Some(b);
            self.io.enqueue(Message::Triple(self.label, b, 0));
        } else {
            self.waiting_for = None;
            self.finished = true;
            if let Some(a) = self.parent {
                self.io.enqueue(Message::Triple(self.label, a, 1));
            }
        }
    }

    fn on_message(&mut self, msg: Message) {
        match msg {
            Message::Int(m) => {
                if self.message.is_none() {
                    self.message = Some(m);
                }
            }
            Message::Triple(a, b, 0) if b == self.label => {
                if self.started {
                    self.io.enqueue(Message::Triple(self.label, a, 1));
                } else {
                    self.spread(Some(a));
                }
            }
            Message::Triple(a, b, 1) if b == self.label && self.waiting_for == Some(a) => {
                self.forward_next();
            }
            _ => {}
        }
    }

    fn hear(&mut self, beep: Beep) {
        if let Some(msg) = self.io.feed(beep) {
            self.on_message(msg);
        }
    }
}

impl NodeAutomaton for NeighborhoodAwareNode {
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
        !self.finished || self.io.sending()
    }

    fn fault(&self) -> Option<String> {
        self.io.fault()
    }

    fn runs(&mut self) -> Option<&mut dyn RunAutomaton> {
        Some(self)
    }
}

impl RunAutomaton for NeighborhoodAwareNode {
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
