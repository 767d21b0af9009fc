//! Run-length event traces.
//!
//! A record stands for `count` events on consecutive rounds starting at
//! `round`; sequence numbers advance by one per round. Records of the same
//! stream (for example, heard beeps at one node) are merged on push whenever
//! they continue each other, so the stored form does not depend on how an
//! engine chunked its work.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{self, Write};

use crate::codec::{Beep, Message};
use crate::engine::Round;
use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    Sent { node: NodeId, kind: Beep, seq: u64 },
    Delivered { receiver: NodeId, sender: NodeId, seq: u64, kind: Beep },
    Heard { node: NodeId, kind: Beep },
    Output { node: NodeId, msg: Message },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum StreamKey {
    Sent(NodeId),
    Delivered(NodeId, NodeId),
    Heard(NodeId),
    Output(NodeId),
}

impl Event {
    fn key(&self) -> StreamKey {
        match *self {
            Event::Sent { node, .. } => StreamKey::Sent(node),
            Event::Delivered { receiver, sender, .. } => StreamKey::Delivered(receiver, sender),
            Event::Heard { node, .. } => StreamKey::Heard(node),
            Event::Output { node, .. } => StreamKey::Output(node),
        }
    }

    /// Order of events within one round in the line format.
    fn phase(&self) -> u8 {
        match self {
            Event::Sent { .. } => 0,
            Event::Delivered { .. } => 1,
            Event::Heard { .. } => 2,
            Event::Output { .. } => 3,
        }
    }

    fn node(&self) -> NodeId {
        match *self {
            Event::Sent { node, .. } | Event::Heard { node, .. } | Event::Output { node, .. } => node,
            Event::Delivered { receiver, .. } => receiver,
        }
    }

    fn seq(&self) -> Option<u64> {
        match *self {
            Event::Sent { seq, .. } | Event::Delivered { seq, .. } => Some(seq),
            _ => None,
        }
    }

    fn with_seq(self, seq: u64) -> Event {
        match self {
            Event::Sent { node, kind, .. } => Event::Sent { node, kind, seq },
            Event::Delivered { receiver, sender, kind, .. } => {
                Event::Delivered { receiver, sender, seq, kind }
            }
            other => other,
        }
    }

    /// The `i`-th event of a run starting with `self`.
    fn nth(self, i: u64) -> Event {
        match self.seq() {
            Some(s) => self.with_seq(s + i),
            None => self,
        }
    }

    fn continues(&self, prev: &Record) -> bool {
        if matches!(self, Event::Output { .. }) {
            return false;
        }
        let same_kind = match (prev.event, *self) {
            (Event::Sent { kind: a, .. }, Event::Sent { kind: b, .. }) => a == b,
            (Event::Delivered { kind: a, .. }, Event::Delivered { kind: b, .. }) => a == b,
            (Event::Heard { kind: a, .. }, Event::Heard { kind: b, .. }) => a == b,
            _ => false,
        };
        let seq_ok = match (prev.event.seq(), self.seq()) {
            (Some(a), Some(b)) => a + prev.count == b,
            (None, None) => true,
            _ => false,
        };
        same_kind && seq_ok
    }

    fn line(&self, round: Round) -> String {
        let node = self.node();
        match *self {
            Event::Sent { kind, seq, .. } => format!("{round}|SENT|{node}|{kind} {seq}"),
            Event::Delivered { sender, seq, .. } => format!("{round}|DELIV|{node}|{sender} {seq}"),
            Event::Heard { kind, .. } => format!("{round}|HEARD|{node}|{kind}"),
            Event::Output { msg, .. } => format!("{round}|OUTPUT|{node}|{msg}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Record {
    pub round: Round,
    pub count: u64,
    pub event: Event,
}

impl Record {
    pub fn last_round(&self) -> Round {
        self.round + self.count - 1
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    records: Vec<Record>,
    open: HashMap<StreamKey, usize>,
}

impl PartialEq for Trace {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, round: Round, count: u64, event: Event) {
        if count == 0 {
            return;
        }
        let key = event.key();
        if let Some(&i) = self.open.get(&key) {
            let prev = &mut self.records[i];
            if prev.round + prev.count == round && event.continues(prev) {
                prev.count += count;
                return;
            }
        }
        self.open.insert(key, self.records.len());
        self.records.push(Record { round, count, event });
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// Records sorted by stream, then round.
    pub fn canonical(&self) -> Vec<Record> {
        let mut out = self.records.clone();
        out.sort_by_key(|r| (r.event.key(), r.round));
        out
    }

    /// Total number of events of all kinds.
    pub fn event_count(&self) -> u128 {
        self.records.iter().map(|r| r.count as u128).sum()
    }

    pub fn sent_count(&self) -> u128 {
        self.records
            .iter()
            .filter(|r| matches!(r.event, Event::Sent { .. }))
            .map(|r| r.count as u128)
            .sum()
    }

    /// Beeps `node` sent in rounds `<= round`.
    pub fn sent_by(&self, node: NodeId, round: Round) -> u64 {
        self.records
            .iter()
            .filter(|r| matches!(r.event, Event::Sent { node: v, .. } if v == node))
            .filter(|r| r.round <= round)
            .map(|r| r.count.min(round - r.round + 1))
            .sum()
    }

    /// Round in which `node`'s beep number `seq` was sent.
    pub fn send_round_of(&self, node: NodeId, seq: u64) -> Option<Round> {
        self.records.iter().find_map(|r| match r.event {
            Event::Sent { node: v, seq: s, .. } if v == node && s <= seq && seq < s + r.count => {
                Some(r.round + (seq - s))
            }
            _ => None,
        })
    }

    /// Heard runs `(round, count, kind)` at `node` in rounds `<= upto`.
    pub fn heard_history(&self, node: NodeId, upto: Round) -> Vec<(Round, u64, Beep)> {
        let mut out: Vec<_> = self
            .records
            .iter()
            .filter_map(|r| match r.event {
                Event::Heard { node: v, kind } if v == node && r.round <= upto => {
                    Some((r.round, r.count.min(upto - r.round + 1), kind))
                }
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Drops every event after `round`.
    pub fn truncate_after(&mut self, round: Round) {
        self.records.retain(|r| r.round <= round);
        for r in &mut self.records {
            r.count = r.count.min(round - r.round + 1);
        }
        self.open.clear();
    }

    /// Line format, one event per line: `round|event|node|detail`.
    ///
    /// Expands runs, so only use it on traces of modest size.
    pub fn write_lines<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut events: Vec<(Round, u8, Event)> = Vec::new();
        for r in &self.records {
            for i in 0..r.count {
                let e = r.event.nth(i);
                events.push((r.round + i, e.phase(), e));
            }
        }
        events.sort_unstable_by_key(|&(round, phase, e)| (round, phase, e.node(), e));
        for (round, _, e) in events {
            writeln!(w, "{}", e.line(round))?;
        }
        Ok(())
    }

    pub fn to_lines(&self) -> String {
        let mut buf = Vec::new();
        self.write_lines(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("trace lines are ASCII")
    }

    /// Compact multi-line summary of the canonical records.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in self.canonical() {
            let _ = writeln!(s, "{}x{} {}", r.round, r.count, r.event.line(r.round));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contiguous_pushes_merge() {
        let mut t = Trace::new();
        for r in 0..5 {
            t.push(r, 1, Event::Sent { node: 1, kind: Beep::Loud, seq: r });
        }
        t.push(5, 3, Event::Sent { node: 1, kind: Beep::Soft, seq: 5 });
        assert_eq!(t.records().len(), 2);
        assert_eq!(t.sent_count(), 8);
        assert_eq!(t.sent_by(1, 6), 7);
        assert_eq!(t.send_round_of(1, 6), Some(6));
    }

    #[test]
    fn interleaved_streams_still_merge() {
        let mut a = Trace::new();
        let mut b = Trace::new();
        for r in 0..4 {
            a.push(r, 1, Event::Heard { node: 0, kind: Beep::Loud });
            a.push(r, 1, Event::Heard { node: 1, kind: Beep::Loud });
        }
        b.push(0, 4, Event::Heard { node: 1, kind: Beep::Loud });
        b.push(0, 2, Event::Heard { node: 0, kind: Beep::Loud });
        b.push(2, 2, Event::Heard { node: 0, kind: Beep::Loud });
        assert_eq!(a, b);
    }

    #[test]
    fn line_format() {
        let mut t = Trace::new();
        t.push(3, 1, Event::Heard { node: 1, kind: Beep::Soft });
        t.push(3, 1, Event::Sent { node: 0, kind: Beep::Soft, seq: 0 });
        t.push(3, 1, Event::Delivered { receiver: 1, sender: 0, seq: 0, kind: Beep::Soft });
        t.push(3, 1, Event::Output { node: 1, msg: Message::Int(4) });
        assert_eq!(t.to_lines(), "3|SENT|0|s 0\n3|DELIV|1|0 0\n3|HEARD|1|s\n3|OUTPUT|1|4\n");
    }

    #[test]
    fn truncation_clips_runs() {
        let mut t = Trace::new();
        t.push(2, 10, Event::Heard { node: 0, kind: Beep::Loud });
        t.push(20, 1, Event::Heard { node: 0, kind: Beep::Soft });
        t.truncate_after(5);
        assert_eq!(t.heard_history(0, 100), vec![(2, 4, Beep::Loud)]);
    }
}
