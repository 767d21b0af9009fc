//! Trace helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use beepcast::codec::{Beep, Decoder};
use beepcast::engine::{validate_schedule, Event, Outcome, PendingBeep, Round, Trace};
use beepcast::graph::LabeledGraph;

/// Every event of the trace, one per round.
pub fn expand(trace: &Trace) -> Vec<(Round, Event)> {
    let mut out = Vec::new();
    for r in trace.records() {
        for i in 0..r.count {
            let ev = match r.event {
                Event::Sent { node, kind, seq } => Event::Sent { node, kind, seq: seq + i },
                Event::Delivered { receiver, sender, seq, kind } => {
                    Event::Delivered { receiver, sender, seq: seq + i, kind }
                }
                other => other,
            };
            out.push((r.round + i, ev));
        }
    }
    out
}

pub struct Beeps {
    /// (sender, seq) -> (kind, send round)
    pub sent: BTreeMap<(usize, u64), (Beep, Round)>,
    /// (sender, seq) -> delivery rounds, one per receiver
    pub delivered: BTreeMap<(usize, u64), Vec<(usize, Round)>>,
}

pub fn beeps(trace: &Trace) -> Beeps {
    let mut sent = BTreeMap::new();
    let mut delivered: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for (round, ev) in expand(trace) {
        match ev {
            Event::Sent { node, kind, seq } => {
                sent.insert((node, seq), (kind, round));
            }
            Event::Delivered { receiver, sender, seq, .. } => {
                delivered.entry((sender, seq)).or_default().push((receiver, round));
            }
            _ => {}
        }
    }
    Beeps { sent, delivered }
}

/// Cost conservation, simultaneous delivery to all neighbors, and the
/// adversary constraints on every beep.
pub fn check_model(g: &LabeledGraph, o: &Outcome) {
    let b = beeps(&o.trace);
    // cost conservation
    assert_eq!(o.cost, b.sent.len() as u128);
    assert_eq!(o.cost, o.sent_per_node.iter().sum::<u128>());
    let mut last: HashMap<usize, Round> = HashMap::new();
    for (&(sender, seq), &(kind, send_round)) in &b.sent {
        let d = &b.delivered[&(sender, seq)];
        // one delivery per neighbor, all in the same round
        let receivers: BTreeSet<usize> = d.iter().map(|&(r, _)| r).collect();
        assert_eq!(receivers, g.neighbors(sender).iter().copied().collect());
        assert_eq!(d.len(), g.degree(sender));
        let round = d[0].1;
        assert!(d.iter().all(|&(_, r)| r == round));
        let pending = PendingBeep { sender, seq, kind, send_round, delivery_round: round };
        validate_schedule(&pending, last.get(&sender).copied()).unwrap();
        last.insert(sender, round);
    }
}

/// Send-to-last-delivery interval of every frame, with its sender. Works on
/// run-length records; a beep reaches all neighbors in one round, so the
/// deliveries to one receiver suffice.
pub fn frame_segments(o: &Outcome) -> Vec<(usize, Round, Round)> {
    let mut sent: BTreeMap<usize, Vec<(u64, u64, Beep, Round)>> = BTreeMap::new();
    let mut delivered: BTreeMap<(usize, usize), Vec<(u64, u64, Round)>> = BTreeMap::new();
    for r in o.trace.records() {
        match r.event {
            Event::Sent { node, kind, seq } => sent.entry(node).or_default().push((seq, r.count, kind, r.round)),
            Event::Delivered { receiver, sender, seq, .. } => {
                delivered.entry((sender, receiver)).or_default().push((seq, r.count, r.round))
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    for (sender, mut runs) in sent {
        runs.sort_unstable();
        let mut blocks = delivered.range((sender, 0)..(sender + 1, 0)).next().expect("delivered").1.clone();
        blocks.sort_unstable();
        let delivery = |seq: u64| {
            let i = blocks.partition_point(|b| b.0 <= seq) - 1;
            let (seq0, count, round) = blocks[i];
            assert!(seq < seq0 + count);
            round + (seq - seq0)
        };
        let mut dec = Decoder::new();
        let mut start = None;
        for (seq0, count, kind, round) in runs {
            for i in 0..count {
                start.get_or_insert(round + i);
                if dec.feed(kind).unwrap().is_some() {
                    out.push((sender, start.take().unwrap(), delivery(seq0 + i)));
                }
            }
        }
        assert!(!dec.mid_frame() && start.is_none());
    }
    out
}

pub fn check_disjoint(o: &Outcome) {
    let mut segs = frame_segments(o);
    segs.sort_unstable_by_key(|s| (s.1, s.2));
    // the two latest-ending earlier segments from distinct senders
    let mut best: Option<(Round, usize)> = None;
    let mut second: Option<(Round, usize)> = None;
    for &(sender, start, end) in &segs {
        let rival = match best {
            Some((_, b)) if b == sender => second,
            other => other,
        };
        if let Some((e, other)) = rival {
            assert!(e < start, "segment of node {sender} from {start} overlaps node {other} until {e}");
        }
        match best {
            Some((e, b)) if b == sender => best = Some((e.max(end), b)),
            Some((e, b)) if end > e => {
                second = Some((e, b));
                best = Some((end, sender));
            }
            Some(_) => {
                if second.is_none_or(|(e, _)| end > e) {
                    second = Some((end, sender));
                }
            }
            None => best = Some((end, sender)),
        }
    }
}
