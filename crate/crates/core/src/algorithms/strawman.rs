use crate::codec::{Beep, Message};
use crate::engine::{Action, NodeAutomaton, Round, RunAction, RunAutomaton};

/// A deliberately naive protocol used as a target for the confusion demos.
///
/// Message `m` is sent as `counts[m]` loud beeps. Every other node counts the
/// beeps it hears, and once `patience` rounds pass without hearing anything
/// it outputs the largest `m` with `counts[m] <= heard` and relays as many
/// loud beeps as it heard. Labels are never used.
#[derive(Debug, Clone)]
pub struct UnaryRelay {
    counts: Vec<u64>,
    patience: u64,
    heard: u64,
    last_heard: Option<Round>,
    to_send: u64,
    output: Option<Message>,
}

impl UnaryRelay {
    pub const DEFAULT_PATIENCE: u64 = 2;

    /// `counts` must be non-decreasing and positive.
    pub fn new(counts: Vec<u64>, patience: u64, message: Option<u64>) -> Self {
        assert!(patience >= 1, "patience must be positive");
        assert!(counts.first().is_some_and(|&c| c > 0), "counts must be positive");
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "counts must be non-decreasing");
        let to_send = message.map_or(0, |m| counts[m as usize]);
        UnaryRelay {
            counts,
            patience,
            heard: 0,
            last_heard: None,
            to_send,
            output: message.map(Message::Int),
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    fn decode(&self) -> u64 {
        self.counts.iter().rposition(|&c| c <= self.heard).unwrap_or(0) as u64
    }

    fn due(&self) -> Option<Round> {
        match (self.output, self.last_heard) {
            (None, Some(r)) => Some(r + self.patience),
            _ => None,
        }
    }

    fn maybe_output(&mut self, round: Round) {
        if self.due().is_some_and(|w| round >= w) {
            self.output = Some(Message::Int(self.decode()));
            self.to_send = self.heard;
        }
    }
}

impl NodeAutomaton for UnaryRelay {
    fn step(&mut self, round: Round) -> Action {
        self.maybe_output(round);
        if self.to_send > 0 {
            self.to_send -= 1;
            Action::Send(Beep::Loud)
        } else {
            Action::Listen
        }
    }

    fn on_hear(&mut self, round: Round, _beep: Beep) {
        if self.output.is_none() {
            self.heard += 1;
            self.last_heard = Some(round);
        }
    }

    fn output(&self) -> Option<Message> {
        self.output
    }

    fn active(&self) -> bool {
        self.output.is_none() || self.to_send > 0
    }

    fn next_wake(&self) -> Option<Round> {
        self.due()
    }

    fn runs(&mut self) -> Option<&mut dyn RunAutomaton> {
        Some(self)
    }
}

impl RunAutomaton for UnaryRelay {
    fn next_run(&mut self, round: Round) -> RunAction {
        self.maybe_output(round);
        if self.to_send > 0 {
            RunAction::Send { kind: Beep::Loud, count: std::mem::take(&mut self.to_send) }
        } else {
            RunAction::Listen { wake: self.due() }
        }
    }

    fn hear_budget(&self, _beep: Beep) -> u64 {
        u64::MAX
    }

    fn on_hear_run(&mut self, round: Round, _beep: Beep, count: u64) {
        if self.output.is_none() {
            self.heard += count;
            self.last_heard = Some(round + count - 1);
        }
    }
}
