//! Frame transmission and reception shared by the encoded-message protocols.

use std::collections::VecDeque;

use crate::codec::{encode_message, Beep, Decoder, Message};
use crate::engine::Action;

/// Outgoing beeps as runs of one kind, plus the receive-side decoder.
#[derive(Debug, Clone, Default)]
pub(crate) struct FrameIo {
    outgoing: VecDeque<(Beep, u64)>,
    decoder: Decoder,
    fault: Option<String>,
}

/// Beyond this many hears without a completed frame the budget is capped;
/// the engine simply asks again.
const BUDGET_PROBE: u64 = 64;

impl FrameIo {
    pub fn enqueue(&mut self, msg: Message) {
        for b in encode_message(msg).iter() {
            match self.outgoing.back_mut() {
                Some((kind, count)) if *kind == b => *count += 1,
                _ => self.outgoing.push_back((b, 1)),
            }
        }
    }

    pub fn sending(&self) -> bool {
        !self.outgoing.is_empty()
    }

    pub fn step(&mut self) -> Action {
        match self.outgoing.front_mut() {
            Some((kind, count)) => {
                let kind = *kind;
                *count -= 1;
                if *count == 0 {
                    self.outgoing.pop_front();
                }
                Action::Send(kind)
            }
            None => Action::Listen,
        }
    }

    pub fn next_send_run(&mut self) -> Option<(Beep, u64)> {
        self.outgoing.pop_front()
    }

    /// Feeds one heard beep; decode errors are remembered as a fault.
    pub fn feed(&mut self, beep: Beep) -> Option<Message> {
        match self.decoder.feed(beep) {
            Ok(m) => m,
            Err(e) => {
                self.fault.get_or_insert_with(|| format!("undecodable frame: {e}"));
                None
            }
        }
    }

    /// Hears of `beep` that can be absorbed before a frame might complete.
    pub fn hear_budget(&self, beep: Beep) -> u64 {
        let mut probe = self.decoder.clone();
        for i in 1..=BUDGET_PROBE {
            if matches!(probe.feed(beep), Ok(Some(_))) {
                return i;
            }
        }
        BUDGET_PROBE
    }

    pub fn fault(&self) -> Option<String> {
        self.fault.clone()
    }

    pub fn set_fault(&mut self, msg: String) {
        self.fault.get_or_insert(msg);
    }
}
