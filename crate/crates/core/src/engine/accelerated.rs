use std::collections::VecDeque;

use super::{
    check_setup, hear, EngineError, Event, Ledger, NodeAutomaton, Outcome, Round, RunAction,
    RunConfig, ScheduleViolation, Termination,
};
use crate::adversary::{Adversary, DeliveryRun, SentRun};
use crate::codec::Beep;
use crate::graph::LabeledGraph;

/// Scheduled deliveries of consecutive beeps of one sender.
#[derive(Debug, Clone, Copy)]
struct Queued {
    start: Round,
    count: u64,
    seq: u64,
    kind: Beep,
}

#[derive(Debug, Clone, Copy, Default)]
struct NodeClock {
    /// Exclusive end of the current send run; the node is idle at or after it.
    busy_until: Round,
    wake: Option<Round>,
    needs_query: bool,
}

/// Executes the automata over runs of identical beeps.
///
/// Produces the same outputs, cost, and trace as [`super::run`] whenever the
/// latter completes within its limits.
pub fn run_accelerated(
    graph: &LabeledGraph,
    automata: &mut [Box<dyn NodeAutomaton>],
    adversary: &mut dyn Adversary,
    cfg: &RunConfig,
) -> Result<Outcome, EngineError> {
    check_setup(graph, automata, cfg)?;
    for (v, a) in automata.iter_mut().enumerate() {
        if a.runs().is_none() {
            return Err(EngineError::UnsupportedAutomaton(v));
        }
    }
    let n = graph.node_count();
    let mut ledger = Ledger::new(n);
    let mut queues: Vec<VecDeque<Queued>> = vec![VecDeque::new(); n];
    let mut clocks = vec![NodeClock { needs_query: true, ..Default::default() }; n];
    let mut soft = vec![0u64; n];
    let mut loud = vec![0u64; n];
    let mut heard_now: Vec<Option<Beep>> = vec![None; n];

    let mut round: Round = 0;
    let termination = loop {
        if round >= cfg.max_rounds {
            round = cfg.max_rounds;
            break Termination::RoundLimit;
        }

        for v in 0..n {
            let c = &mut clocks[v];
            if c.busy_until > round {
                continue;
            }
            if !(c.needs_query || c.wake.is_some_and(|w| w <= round)) {
                continue;
            }
            c.needs_query = false;
            let action = automata[v].runs().expect("checked above").next_run(round);
            match action {
                RunAction::Listen { wake } => clocks[v].wake = wake,
                RunAction::Send { kind, count } => {
                    if count == 0 {
                        return Err(EngineError::EmptyRun(v));
                    }
                    let seq = ledger.sent[v];
                    let sent = SentRun { sender: v, seq0: seq, kind, count, send_round: round };
                    let blocks = adversary.schedule_run(&ledger.context(round, graph), &sent);
                    let last = check_blocks(&sent, &blocks, ledger.last_delivery[v])?;
                    ledger.last_delivery[v] = Some(last);
                    let mut s = seq;
                    for b in blocks {
                        queues[v].push_back(Queued { start: b.start, count: b.count, seq: s, kind });
                        s += b.count;
                    }
                    ledger.sent[v] += count;
                    ledger.cost += count as u128;
                    ledger.trace.push(round, count, Event::Sent { node: v, kind, seq });
                    clocks[v] = NodeClock { busy_until: round + count, wake: None, needs_query: true };
                }
            }
            ledger.note_output(v, automata[v].as_ref(), round);
        }

        if ledger.cost > cfg.max_cost {
            break Termination::CostLimit;
        }
        let idle = clocks.iter().all(|c| c.busy_until <= round && c.wake.is_none());
        if idle && queues.iter().all(VecDeque::is_empty) {
            break Termination::Quiescent;
        }

        // Find the end of the homogeneous span starting at `round`.
        let stop_now = cfg.stop_when_output.is_some_and(|x| ledger.outputs[x].is_some());
        let mut end = if stop_now { round + 1 } else { cfg.max_rounds };
        for c in &clocks {
            if c.busy_until > round {
                end = end.min(c.busy_until);
            }
            if let Some(w) = c.wake.filter(|&w| w > round) {
                end = end.min(w);
            }
        }
        soft.fill(0);
        loud.fill(0);
        for (sender, q) in queues.iter().enumerate() {
            let Some(front) = q.front() else { continue };
            if front.start > round {
                end = end.min(front.start);
                continue;
            }
            end = end.min(front.start + front.count);
            for &u in graph.neighbors(sender) {
                match front.kind {
                    Beep::Soft => soft[u] += 1,
                    Beep::Loud => loud[u] += 1,
                }
            }
        }
        for u in 0..n {
            let listening = clocks[u].busy_until <= round;
            heard_now[u] = hear(soft[u], loud[u], listening, cfg.reception);
            if let Some(kind) = heard_now[u] {
                let budget = automata[u].runs().expect("checked above").hear_budget(kind).max(1);
                end = end.min(round.saturating_add(budget));
            }
        }
        let span = end - round;

        // Commit the span.
        for sender in 0..n {
            let Some(front) = queues[sender].front_mut() else { continue };
            if front.start > round {
                continue;
            }
            let seq = front.seq + (round - front.start);
            for &u in graph.neighbors(sender) {
                let ev = Event::Delivered { receiver: u, sender, seq, kind: front.kind };
                ledger.trace.push(round, span, ev);
            }
            let consumed = round + span - front.start;
            if consumed >= front.count {
                queues[sender].pop_front();
            }
        }
        for u in 0..n {
            if let Some(kind) = heard_now[u] {
                automata[u].runs().expect("checked above").on_hear_run(round, kind, span);
                ledger.heard[u] += span;
                ledger.trace.push(round, span, Event::Heard { node: u, kind });
                ledger.note_output(u, automata[u].as_ref(), end - 1);
                clocks[u].needs_query = true;
            }
        }

        if let Some(x) = cfg.stop_when_output {
            if let Some(at) = ledger.output_rounds[x] {
                round = at;
                break Termination::Stopped;
            }
        }
        round = end;
    };
    Ok(ledger.finish(automata, round, termination))
}

/// Validates the delivery blocks for one send run and returns the last
/// delivery round.
fn check_blocks(
    run: &SentRun,
    blocks: &[DeliveryRun],
    mut last: Option<Round>,
) -> Result<Round, EngineError> {
    let fail = |seq, violation| EngineError::AdversaryViolation { sender: run.sender, seq, violation };
    let mut offset = 0u64;
    for b in blocks {
        let seq = run.seq0 + offset;
        if b.count == 0 || offset + b.count > run.count {
            return Err(fail(seq, ScheduleViolation::BadRunCover));
        }
        if b.start < run.send_round + offset {
            return Err(fail(seq, ScheduleViolation::TimeTravel));
        }
        if last.is_some_and(|l| b.start <= l) {
            return Err(fail(seq, ScheduleViolation::FifoOrCollapse));
        }
        last = Some(b.start + b.count - 1);
        offset += b.count;
    }
    match last {
        Some(l) if offset == run.count => Ok(l),
        _ => Err(fail(run.seq0 + offset, ScheduleViolation::BadRunCover)),
    }
}
