use std::collections::BTreeMap;

use super::{
    check_setup, hear, validate_schedule, Action, EngineError, Event, Ledger, NodeAutomaton,
    Outcome, PendingBeep, Round, RunConfig, Termination,
};
use crate::adversary::{Adversary, SentBeep};
use crate::codec::Beep;
use crate::graph::{LabeledGraph, NodeId};

/// Executes the automata one round at a time.
pub fn run(
    graph: &LabeledGraph,
    automata: &mut [Box<dyn NodeAutomaton>],
    adversary: &mut dyn Adversary,
    cfg: &RunConfig,
) -> Result<Outcome, EngineError> {
    check_setup(graph, automata, cfg)?;
    let n = graph.node_count();
    let mut ledger = Ledger::new(n);
    let mut pending: BTreeMap<Round, Vec<(NodeId, u64, Beep)>> = BTreeMap::new();
    let mut actions = vec![Action::Listen; n];

    let mut round: Round = 0;
    let termination = loop {
        if round >= cfg.max_rounds {
            round = cfg.max_rounds;
            break Termination::RoundLimit;
        }

        let mut any_send = false;
        for v in 0..n {
            actions[v] = automata[v].step(round);
            if let Action::Send(kind) = actions[v] {
                any_send = true;
                let seq = ledger.sent[v];
                let beep = SentBeep { sender: v, seq, kind, send_round: round };
                let delivery_round = adversary.schedule(&ledger.context(round, graph), &beep);
                let p = PendingBeep { sender: v, seq, kind, send_round: round, delivery_round };
                validate_schedule(&p, ledger.last_delivery[v]).map_err(|violation| {
                    EngineError::AdversaryViolation { sender: v, seq, violation }
                })?;
                ledger.last_delivery[v] = Some(delivery_round);
                pending.entry(delivery_round).or_default().push((v, seq, kind));
                ledger.sent[v] += 1;
                ledger.cost += 1;
                ledger.trace.push(round, 1, Event::Sent { node: v, kind, seq });
            }
            ledger.note_output(v, automata[v].as_ref(), round);
        }

        if ledger.cost > cfg.max_cost {
            break Termination::CostLimit;
        }
        if !any_send && pending.is_empty() && automata.iter().all(|a| a.next_wake().is_none()) {
            break Termination::Quiescent;
        }

        if let Some(mut batch) = pending.remove(&round) {
            batch.sort_unstable();
            let mut soft = vec![0u64; n];
            let mut loud = vec![0u64; n];
            for &(sender, seq, kind) in &batch {
                for &u in graph.neighbors(sender) {
                    match kind {
                        Beep::Soft => soft[u] += 1,
                        Beep::Loud => loud[u] += 1,
                    }
                    ledger.trace.push(round, 1, Event::Delivered { receiver: u, sender, seq, kind });
                }
            }
            for u in 0..n {
                let listening = actions[u] == Action::Listen;
                if let Some(kind) = hear(soft[u], loud[u], listening, cfg.reception) {
                    automata[u].on_hear(round, kind);
                    ledger.heard[u] += 1;
                    ledger.trace.push(round, 1, Event::Heard { node: u, kind });
                    ledger.note_output(u, automata[u].as_ref(), round);
                }
            }
        }

        if cfg.stop_when_output.is_some_and(|x| ledger.outputs[x].is_some()) {
            break Termination::Stopped;
        }
        round += 1;
    };
    Ok(ledger.finish(automata, round, termination))
}
