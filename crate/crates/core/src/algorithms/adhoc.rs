use crate::codec::{Beep, Message};
use crate::engine::{Action, NodeAutomaton, Round, RunAction, RunAutomaton};

use super::pairing::{adhoc_try_decode_with, Packing, MAX_PACK};
use super::AlgoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Receiving { loud: u64, soft: u64 },
    Sending { loud: u64, soft: u64 },
    Inactive,
}

/// A node that knows only its own label.
///
/// Relays the message as `8^pack(label, m)` loud beeps followed by as many
/// soft beeps. A receiver decodes once it has heard at least half as many soft
/// beeps as loud ones.
#[derive(Debug, Clone)]
pub struct AdHocNode {
    label: u64,
    packing: Packing,
    phase: Phase,
    output: Option<Message>,
    fault: Option<String>,
}

/// `8^pack(label, m)`, rejecting packed values whose count overflows.
pub fn adhoc_beep_count(label: u64, message: u64, packing: Packing) -> Result<u64, AlgoError> {
    let pack = packing.pack(label, message)?;
    if pack > MAX_PACK {
        return Err(AlgoError::PackTooLarge { label, message, pack });
    }
    Ok(1u64 << (3 * pack))
}

impl AdHocNode {
    pub fn new(label: u64, message: Option<u64>, packing: Packing) -> Result<Self, AlgoError> {
        let (phase, output) = match message {
            Some(m) => {
                let c = adhoc_beep_count(label, m, packing)?;
                (Phase::Sending { loud: c, soft: c }, Some(Message::Int(m)))
            }
            None => (Phase::Receiving { loud: 0, soft: 0 }, None),
        };
        Ok(AdHocNode { label, packing, phase, output, fault: None })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    fn hear_one_kind(&mut self, beep: Beep, count: u64) {
        let Phase::Receiving { loud, soft } = &mut self.phase else { return };
        match beep {
            Beep::Loud => *loud += count,
            Beep::Soft => *soft += count,
        }
        match adhoc_try_decode_with(*loud, *soft, self.packing) {
            Ok(None) => {}
            Ok(Some(m)) => {
                self.output = Some(Message::Int(m));
                self.phase = match adhoc_beep_count(self.label, m, self.packing) {
                    Ok(c) => Phase::Sending { loud: c, soft: c },
                    Err(e) => {
                        self.fault = Some(e.to_string());
                        Phase::Inactive
                    }
                };
            }
            Err(e) => {
                self.fault.get_or_insert_with(|| e.to_string());
            }
        }
    }
}

impl NodeAutomaton for AdHocNode {
    fn step(&mut self, _round: Round) -> Action {
        match &mut self.phase {
            Phase::Sending { loud, soft } => {
                let kind = if *loud > 0 {
                    *loud -= 1;
                    Beep::Loud
                } else {
                    *soft -= 1;
                    Beep::Soft
                };
                if *loud == 0 && *soft == 0 {
                    self.phase = Phase::Inactive;
                }
                Action::Send(kind)
            }
            _ => Action::Listen,
        }
    }

    fn on_hear(&mut self, _round: Round, beep: Beep) {
        self.hear_one_kind(beep, 1);
    }

    fn output(&self) -> Option<Message> {
        self.output
    }

    fn active(&self) -> bool {
        self.phase != Phase::Inactive
    }

    fn fault(&self) -> Option<String> {
        self.fault.clone()
    }

    fn runs(&mut self) -> Option<&mut dyn RunAutomaton> {
        Some(self)
    }
}

impl RunAutomaton for AdHocNode {
    fn next_run(&mut self, _round: Round) -> RunAction {
        match &mut self.phase {
            Phase::Sending { loud, soft } if *loud > 0 => {
                let count = std::mem::take(loud);
                if *soft == 0 {
                    self.phase = Phase::Inactive;
                }
                RunAction::Send { kind: Beep::Loud, count }
            }
            Phase::Sending { soft, .. } => {
                let count = *soft;
                self.phase = Phase::Inactive;
                RunAction::Send { kind: Beep::Soft, count }
            }
            _ => RunAction::Listen { wake: None },
        }
    }

    fn hear_budget(&self, beep: Beep) -> u64 {
        match (self.phase, beep) {
            // soft beeps are what complete a decode
            (Phase::Receiving { loud, soft }, Beep::Soft) if loud > 0 => {
                loud.div_ceil(2).saturating_sub(soft).max(1)
            }
            (Phase::Receiving { loud: 0, .. }, Beep::Soft) => 1,
            _ => u64::MAX,
        }
    }

    fn on_hear_run(&mut self, _round: Round, beep: Beep, count: u64) {
        self.hear_one_kind(beep, count);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn receive_then_send() {
        let mut a = AdHocNode::new(1, None, Packing::Phi).unwrap();
        a.on_hear(0, Beep::Loud);
        assert_eq!(a.output(), None);
        a.on_hear(1, Beep::Soft);
        assert_eq!(a.output(), Some(Message::Int(0)));
        // phi(1, 0) = 2
        assert_eq!(a.phase(), Phase::Sending { loud: 64, soft: 64 });
        assert_eq!(a.next_run(2), RunAction::Send { kind: Beep::Loud, count: 64 });
        assert_eq!(a.next_run(66), RunAction::Send { kind: Beep::Soft, count: 64 });
        assert_eq!(a.next_run(130), RunAction::Listen { wake: None });
        assert!(!a.active());
    }

    #[test]
    fn budget_stops_at_decode() {
        let mut a = AdHocNode::new(1, None, Packing::Phi).unwrap();
        a.on_hear_run(0, Beep::Loud, 70);
        assert_eq!(a.hear_budget(Beep::Soft), 35);
        assert_eq!(a.hear_budget(Beep::Loud), u64::MAX);
        a.on_hear_run(70, Beep::Soft, 34);
        assert_eq!(a.output(), None);
        a.on_hear_run(104, Beep::Soft, 1);
        assert_eq!(a.output(), Some(Message::Int(0)));
    }

    #[test]
    fn oversized_pack_is_rejected() {
        assert!(matches!(
            AdHocNode::new(5, Some(3), Packing::Phi),
            Err(AlgoError::PackTooLarge { pack: 41, .. })
        ));
        assert_eq!(adhoc_beep_count(5, 0, Packing::Phi).unwrap(), 1 << 60);
    }

    #[test]
    fn soft_first_is_a_fault() {
        let mut a = AdHocNode::new(1, None, Packing::Phi).unwrap();
        a.on_hear(0, Beep::Soft);
        assert!(a.fault().is_some());
    }
}
