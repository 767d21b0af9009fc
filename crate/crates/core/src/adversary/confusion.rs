//! Constructive confusion attacks.
//!
//! Each attack produces two executions whose victim node hears exactly the
//! same beeps in the same rounds up to the round it outputs, although the
//! source messages differ. Attacks target concrete automata: they profile the
//! protocol first, then schedule deliveries accordingly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::dominated::{find_nondominated_subset, BeepBudget};
use super::{Fallback, Scripted, PARKED};
use crate::algorithms::{AlgoError, Algorithm};
use crate::codec::{Beep, Message};
use crate::engine::{
    run_accelerated, Action, EngineError, NodeAutomaton, Reception, Round, RunConfig, Termination,
    Trace,
};
use crate::graph::{make_family, FamilySpec, GraphError, LabeledGraph, Labeling, NodeId};

/// Cost ceiling for attack executions.
const ATTACK_COST_LIMIT: u128 = 1 << 62;

#[derive(Debug, thiserror::Error)]
pub enum ConfusionError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Algorithm(#[from] AlgoError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("profiling message {0} hit the cost limit")]
    BudgetExtractionDiverged(u64),
    #[error("node {node} never output for message {message}")]
    VictimSilent { node: NodeId, message: u64 },
    #[error("the symmetric nodes sent different beep counts ({0} and {1})")]
    Asymmetric(u64, u64),
    #[error("invalid attack parameters: {0}")]
    BadParameters(String),
}

/// Delivery rounds for two executions differing only after round `s`.
///
/// The shorter run (`min(k1, k2)` beeps) is delivered in rounds
/// `r, r+1, ...`. The longer one gets the same rounds for that prefix and the
/// rest from `t + 1` on, where `t = max(s, r + min(k1, k2) - 1)`.
pub fn prefix_confusion_schedules(k1: u64, k2: u64, r: Round, s: Round) -> (Vec<Round>, Vec<Round>) {
    let (short, long) = (k1.min(k2), k1.max(k2));
    let a: Vec<Round> = (0..short).map(|i| r + i).collect();
    let t = s.max((r + short).saturating_sub(1));
    let b = a.iter().copied().chain((0..long - short).map(|i| t + 1 + i)).collect();
    (a, b)
}

/// Two executions and the node that cannot tell them apart.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionReport {
    pub attack: String,
    /// Victim node id in execution A and in execution B.
    pub victims: (NodeId, NodeId),
    pub messages: (u64, u64),
    /// Round in which the victim outputs in execution A.
    pub output_round: Round,
    pub outputs: (Option<Message>, Option<Message>),
    pub trace_a: Trace,
    pub trace_b: Trace,
    /// First round in which the victim's heard histories differ, if any.
    pub divergence_round: Option<Round>,
    pub note: String,
}

impl ConfusionReport {
    fn new(
        attack: &str,
        victims: (NodeId, NodeId),
        messages: (u64, u64),
        output_round: Round,
        trace_a: Trace,
        trace_b: Trace,
        note: String,
    ) -> Self {
        let output_at = |t: &Trace, v| output_of(t, v, output_round);
        let outputs = (output_at(&trace_a, victims.0), output_at(&trace_b, victims.1));
        let divergence_round = first_difference(
            &trace_a.heard_history(victims.0, PARKED),
            &trace_b.heard_history(victims.1, PARKED),
        );
        ConfusionReport {
            attack: attack.to_string(),
            victims,
            messages,
            output_round,
            outputs,
            trace_a,
            trace_b,
            divergence_round,
            note,
        }
    }

    /// Re-checks the claim from the embedded traces alone.
    pub fn verify(&self) -> Result<(), String> {
        let (va, vb) = self.victims;
        let s = self.output_round;
        let ha = self.trace_a.heard_history(va, s);
        let hb = self.trace_b.heard_history(vb, s);
        if ha != hb {
            return Err(format!("victim histories differ up to round {s}"));
        }
        let oa = output_of(&self.trace_a, va, s);
        let ob = output_of(&self.trace_b, vb, s);
        if oa.is_none() || oa != ob {
            return Err(format!("victim outputs by round {s} are {oa:?} and {ob:?}"));
        }
        if self.messages.0 == self.messages.1 {
            return Err("the two executions use the same message".into());
        }
        if self.divergence_round.is_some_and(|d| d <= s) {
            return Err("recorded divergence precedes the output round".into());
        }
        Ok(())
    }

    /// Which execution's output is wrong (`'A'` or `'B'`).
    pub fn wrong_execution(&self) -> Option<char> {
        match self.outputs.0 {
            Some(Message::Int(x)) if x != self.messages.0 => Some('A'),
            _ if self.outputs.1 != Some(Message::Int(self.messages.1)) => Some('B'),
            _ => None,
        }
    }

    pub fn summary(&self) -> String {
        let show = |o: Option<Message>| o.map_or("none".to_string(), |m| m.to_string());
        let mut s = String::new();
        let _ = writeln!(s, "attack={}", self.attack);
        let _ = writeln!(s, "victim_a={}", self.victims.0);
        let _ = writeln!(s, "victim_b={}", self.victims.1);
        let _ = writeln!(s, "message_a={}", self.messages.0);
        let _ = writeln!(s, "message_b={}", self.messages.1);
        let _ = writeln!(s, "output_round={}", self.output_round);
        let _ = writeln!(s, "output_a={}", show(self.outputs.0));
        let _ = writeln!(s, "output_b={}", show(self.outputs.1));
        match self.divergence_round {
            Some(d) => {
                let _ = writeln!(s, "divergence_round={d}");
            }
            None => {
                let _ = writeln!(s, "divergence_round=none");
            }
        }
        let wrong = self.wrong_execution().map_or("none".to_string(), |c| c.to_string());
        let _ = writeln!(s, "wrong_execution={wrong}");
        let _ = writeln!(s, "verified={}", self.verify().is_ok());
        if !self.note.is_empty() {
            let _ = writeln!(s, "note={}", self.note);
        }
        s
    }

    /// Writes `summary.txt`, `trace_a.txt` and `trace_b.txt` into `dir`.
    ///
    /// Traces are written as run-length records (`round x count` per line).
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("summary.txt"), self.summary())?;
        std::fs::write(dir.join("trace_a.txt"), self.trace_a.summary())?;
        std::fs::write(dir.join("trace_b.txt"), self.trace_b.summary())?;
        Ok(())
    }
}

fn output_of(t: &Trace, node: NodeId, upto: Round) -> Option<Message> {
    t.records().iter().find_map(|r| match r.event {
        crate::engine::Event::Output { node: v, msg } if v == node && r.round <= upto => Some(msg),
        _ => None,
    })
}

/// First round at which two heard histories (sorted maximal runs) differ.
fn first_difference(a: &[(Round, u64, Beep)], b: &[(Round, u64, Beep)]) -> Option<Round> {
    for i in 0..a.len().max(b.len()) {
        match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) if x == y => continue,
            (Some(&(ra, ca, ka)), Some(&(rb, cb, kb))) => {
                return Some(if ra != rb || ka != kb { ra.min(rb) } else { ra + ca.min(cb) });
            }
            (Some(&(r, ..)), None) | (None, Some(&(r, ..))) => return Some(r),
            (None, None) => unreachable!(),
        }
    }
    None
}

fn attack_config(reception: Reception, stop: Option<NodeId>) -> RunConfig {
    RunConfig {
        max_rounds: PARKED,
        max_cost: ATTACK_COST_LIMIT,
        reception,
        stop_when_output: stop,
    }
}

struct Execution {
    trace: Trace,
    output_round: Option<Round>,
    sent: Vec<u128>,
    termination: Termination,
}

fn execute(
    g: &LabeledGraph,
    alg: &Algorithm,
    message: u64,
    adversary: Scripted,
    cfg: &RunConfig,
    victim: NodeId,
) -> Result<Execution, ConfusionError> {
    let mut automata = alg.build(g, message)?;
    let mut adv = adversary;
    let o = run_accelerated(g, &mut automata, &mut adv, cfg)?;
    Ok(Execution {
        output_round: o.output_rounds[victim],
        sent: o.sent_per_node,
        termination: o.termination,
        trace: o.trace,
    })
}

/// Profile, then plan: `senders` deliver in lockstep to the victim, whose own
/// beeps are withheld; everything else is synchronous.
fn prefix_attack(
    attack: &str,
    g: &LabeledGraph,
    alg: &Algorithm,
    messages: (u64, u64),
    senders: &[NodeId],
    victim: NodeId,
    reception: Reception,
) -> Result<ConfusionReport, ConfusionError> {
    let cfg = attack_config(reception, None);
    let base = || Scripted::new(Fallback::Sync).with_policy(victim, Fallback::Park);

    // Beep counts and last send rounds of the lockstep senders.
    let mut counts = Vec::new();
    let mut r = 0;
    for m in [messages.0, messages.1] {
        let p = execute(g, alg, m, base(), &cfg, victim)?;
        if p.termination == Termination::CostLimit {
            return Err(ConfusionError::BudgetExtractionDiverged(m));
        }
        let k = p.sent[senders[0]] as u64;
        if let Some(&v) = senders.iter().find(|&&v| p.sent[v] as u64 != k) {
            return Err(ConfusionError::Asymmetric(k, p.sent[v] as u64));
        }
        if k > 0 {
            r = r.max(p.trace.send_round_of(senders[0], k - 1).expect("sent") + 1);
        }
        counts.push(k);
    }
    let (ma, mb, ka, kb) = if counts[0] <= counts[1] {
        (messages.0, messages.1, counts[0], counts[1])
    } else {
        (messages.1, messages.0, counts[1], counts[0])
    };

    let planned = |rounds: &[Round]| {
        senders.iter().fold(base(), |s, &v| {
            s.with_plan(v, rounds.to_vec()).with_policy(v, Fallback::Park)
        })
    };
    let (plan_a, _) = prefix_confusion_schedules(ka, kb, r, 0);
    let a = execute(g, alg, ma, planned(&plan_a), &cfg, victim)?;
    let s = a.output_round.ok_or(ConfusionError::VictimSilent { node: victim, message: ma })?;
    let (_, plan_b) = prefix_confusion_schedules(ka, kb, r, s);
    let b = execute(g, alg, mb, planned(&plan_b), &cfg, victim)?;
    let note = format!("lockstep senders {senders:?}; k = ({ka}, {kb}); first delivery round {r}");
    Ok(ConfusionReport::new(attack, (victim, victim), (ma, mb), s, a.trace, b.trace, note))
}

/// Two-node graph with uniform-strength reception against the unary
/// strawman sending `k1` beeps for message 0 and `k2` for message 1.
pub fn build_two_node_confusion(k1: u64, k2: u64) -> Result<ConfusionReport, ConfusionError> {
    if k1 == 0 || k2 == 0 {
        return Err(ConfusionError::BadParameters("beep counts must be positive".into()));
    }
    // Counts must be non-decreasing in the message, so order the messages.
    let alg = Algorithm::unary(vec![k1.min(k2), k1.max(k2)]);
    let g = make_family(&FamilySpec::Path(2), &Labeling::Identity, None, 2)?;
    prefix_attack("two-node", &g, &alg, (0, 1), &[0], 1, Reception::Uniform)
}

/// Anonymous four-cycle `a b c d` with source `a`: `b` and `d` behave
/// identically, so delivering their beeps together leaves `c` hearing only
/// loud beeps.
pub fn build_anonymous_c4_confusion(
    alg: &Algorithm,
    m1: u64,
    m2: u64,
) -> Result<ConfusionReport, ConfusionError> {
    if m1 == m2 {
        return Err(ConfusionError::BadParameters("messages must differ".into()));
    }
    let space = m1.max(m2) + 1;
    let g = make_family(&FamilySpec::Cycle(4), &Labeling::Identity, None, space)?;
    prefix_attack("anonymous-c4", &g, alg, (m1, m2), &[1, 3], 2, Reception::Bivalent)
}

/// Outcome of the sink-confusion attack.
#[derive(Debug, Clone, PartialEq)]
pub enum SinkConfusion {
    Confused(Box<ConfusionReport>),
    /// The budgets for `message` form a dominated set; the attack does not
    /// apply.
    Dominated { message: u64, budget: BeepBudget },
}

struct Profile {
    budget: BeepBudget,
    /// Source beeps sent before it first heard anything, with send rounds.
    source_rounds: Vec<Round>,
    source_heard: bool,
    sink_output: Round,
}

fn star(members: &[u64], label_space: u64, message_space: u64) -> Result<LabeledGraph, GraphError> {
    make_family(
        &FamilySpec::StarGs { members: members.to_vec(), label_space },
        &Labeling::Identity,
        None,
        message_space,
    )
}

fn profile_star(alg: &Algorithm, g: &LabeledGraph, m: u64) -> Result<Profile, ConfusionError> {
    let sink = g.node_count() - 1;
    let adv = Scripted::new(Fallback::Sync)
        .with_policy(0, Fallback::ParkAfterHeard)
        .with_policy(sink, Fallback::Park);
    let p = execute(g, alg, m, adv, &attack_config(Reception::Bivalent, Some(sink)), sink)?;
    match p.termination {
        Termination::CostLimit => return Err(ConfusionError::BudgetExtractionDiverged(m)),
        Termination::Stopped => {}
        _ => return Err(ConfusionError::VictimSilent { node: sink, message: m }),
    }
    let s = p.output_round.expect("stopped on sink output");
    let budget = (1..sink).map(|v| (g.label(v).0, p.sent[v] as u64)).collect();
    let first_hear = p.trace.heard_history(0, s).first().map(|&(r, ..)| r);
    let q = p.trace.sent_by(0, first_hear.unwrap_or(s));
    let source_rounds = (0..q).map(|i| p.trace.send_round_of(0, i).expect("sent")).collect();
    Ok(Profile { budget, source_rounds, source_heard: first_hear.is_some(), sink_output: s })
}

/// Slot of every budgeted beep: beeps listed sender by sender, largest
/// budget first, beep `i` going to slot `i mod K` with `K = floor(N/2)`.
/// Because no budget exceeds half the total, every slot holds beeps of at
/// least two senders and no sender uses a slot twice.
fn slot_plan(budget: &BeepBudget, t: &BTreeSet<u64>) -> (BTreeMap<u64, Vec<u64>>, u64) {
    let mut senders: Vec<(u64, u64)> = t.iter().map(|&l| (l, budget[&l])).collect();
    senders.sort_by_key(|&(l, b)| (std::cmp::Reverse(b), l));
    let total: u64 = senders.iter().map(|&(_, b)| b).sum();
    let slots = total / 2;
    let mut plan = BTreeMap::new();
    let mut i = 0;
    for (l, b) in senders {
        let mut mine: Vec<u64> = (i..i + b).map(|j| j % slots).collect();
        mine.sort_unstable();
        plan.insert(l, mine);
        i += b;
    }
    (plan, slots)
}

/// The star attack on a protocol that knows only labels.
///
/// Profiles the protocol on the star with every middle label, withholding
/// the sink's beeps and the source's beeps sent after it heard something.
/// Picks a non-dominated label set `T` per message, runs both messages on the
/// star over `T` with the budgeted beeps delivered in slots of at least two
/// simultaneous beeps (so the sink only hears loud beeps), and finally shifts
/// the longer execution's late slots past the shorter one's output round.
pub fn build_sink_confusion(
    alg: &Algorithm,
    label_space: u64,
    m: u64,
    m_prime: u64,
) -> Result<SinkConfusion, ConfusionError> {
    if label_space < 4 || m == m_prime {
        return Err(ConfusionError::BadParameters("need L >= 4 and two distinct messages".into()));
    }
    let space = m.max(m_prime) + 1;
    let everyone: Vec<u64> = (1..label_space - 1).collect();
    let full = star(&everyone, label_space, space)?;

    let mut chosen = Vec::new();
    for msg in [m, m_prime] {
        let p = profile_star(alg, &full, msg)?;
        match find_nondominated_subset(&p.budget) {
            Some(t) => chosen.push((msg, p, t)),
            None => return Ok(SinkConfusion::Dominated { message: msg, budget: p.budget }),
        }
    }
    let r = chosen.iter().map(|(_, p, _)| p.sink_output).max().expect("two profiles") + 1;

    struct Prepared {
        msg: u64,
        g: LabeledGraph,
        adv: Scripted,
        slots: BTreeMap<u64, Vec<u64>>,
    }
    let prepare = |msg: u64, p: &Profile, t: &BTreeSet<u64>| -> Result<Prepared, ConfusionError> {
        let members: Vec<u64> = t.iter().copied().collect();
        let g = star(&members, label_space, space)?;
        let sink = g.node_count() - 1;
        let adv = Scripted::new(Fallback::Park)
            .with_plan(0, p.source_rounds.clone())
            .with_policy(sink, Fallback::Park);
        let (slots, _) = slot_plan(&p.budget, t);
        Ok(Prepared { msg, g, adv, slots })
    };
    let with_slots = |prep: &Prepared, round_of: &dyn Fn(u64) -> Round| {
        let mut adv = prep.adv.clone();
        for v in 1..prep.g.node_count() - 1 {
            let rounds = prep.slots[&prep.g.label(v).0].iter().map(|&j| round_of(j)).collect();
            adv = adv.with_plan(v, rounds);
        }
        adv
    };
    let cfg = attack_config(Reception::Bivalent, None);

    let mut runs = Vec::new();
    for (msg, p, t) in &chosen {
        let prep = prepare(*msg, p, t)?;
        let sink = prep.g.node_count() - 1;
        let e = execute(&prep.g, alg, prep.msg, with_slots(&prep, &|j| r + j), &cfg, sink)?;
        let s = e.output_round.ok_or(ConfusionError::VictimSilent { node: sink, message: *msg })?;
        let k: u64 = e.trace.heard_history(sink, s).iter().map(|&(_, c, _)| c).sum();
        runs.push((prep, e, s, k));
    }
    if runs[0].3 > runs[1].3 {
        runs.swap(0, 1);
    }
    let mut runs = runs.into_iter();
    let (prep_a, exec_a, s, ka) = runs.next().expect("two runs");
    let (prep_b, _, _, _) = runs.next().expect("two runs");
    let t_round = s.max(r + ka.saturating_sub(1));
    let shifted = move |j: u64| if j < ka { r + j } else { t_round + 1 + (j - ka) };
    let sink_b = prep_b.g.node_count() - 1;
    let exec_b = execute(&prep_b.g, alg, prep_b.msg, with_slots(&prep_b, &shifted), &cfg, sink_b)?;

    let labels = |g: &LabeledGraph| -> Vec<u64> { (1..g.node_count() - 1).map(|v| g.label(v).0).collect() };
    let mut note = format!(
        "T_a={:?} T_b={:?}; first slot round {r}; sink heard {ka} slots before output",
        labels(&prep_a.g),
        labels(&prep_b.g)
    );
    if chosen.iter().any(|(_, p, _)| !p.source_heard) {
        note.push_str("; source never heard a beep before the sink output, so withholding its later beeps was vacuous");
    }
    let report = ConfusionReport::new(
        "sink-confusion",
        (prep_a.g.node_count() - 1, sink_b),
        (prep_a.msg, prep_b.msg),
        s,
        exec_a.trace,
        exec_b.trace,
        note,
    );
    Ok(SinkConfusion::Confused(Box::new(report)))
}

/// Builds a lone automaton for a given own label.
pub type LabeledFactory<'a> = dyn Fn(u64) -> Box<dyn NodeAutomaton> + 'a;

/// Beeps sent within `horizon` rounds by a lone automaton that hears `x[i]`
/// in round `i` whenever it is listening then.
pub fn beeps_sent_alone(node: &mut dyn NodeAutomaton, x: &[Beep], horizon: Round) -> u64 {
    let mut sent = 0;
    for round in 0..horizon {
        match node.step(round) {
            Action::Send(_) => sent += 1,
            Action::Listen => {
                if let Some(&b) = x.get(round as usize) {
                    node.on_hear(round, b);
                }
            }
        }
    }
    sent
}

/// Every beep sequence of length at most `max_len`.
pub fn all_sequences(max_len: usize) -> Vec<Vec<Beep>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for b in [Beep::Soft, Beep::Loud] {
                let mut t: Vec<Beep> = s.clone();
                t.push(b);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Two labels among `candidates` whose automata send the same number of
/// beeps for every heard sequence in `xs`; the first such pair in label order.
pub fn find_label_collision(
    factory: &LabeledFactory<'_>,
    candidates: &[u64],
    xs: &[Vec<Beep>],
    horizon: Round,
) -> Option<(u64, u64)> {
    let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut best: Option<(u64, u64)> = None;
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    for &l in &sorted {
        let table: Vec<u64> = xs
            .iter()
            .map(|x| beeps_sent_alone(factory(l).as_mut(), x, horizon))
            .collect();
        match seen.get(&table) {
            Some(&first) => {
                if best.is_none_or(|b| (first, l) < b) {
                    best = Some((first, l));
                }
            }
            None => {
                seen.insert(table, l);
            }
        }
    }
    best
}

/// Labels for the chain of four-cycles such that in every cycle the two
/// middle nodes collide in the sense of [`find_label_collision`], given the
/// labels of their two cycle neighbors.
///
/// Path nodes get the smallest labels, then each cycle's `a` and `c` the next
/// unused ones; `b` and `d` take a colliding pair from what remains.
pub fn chain_collision_labels(
    k: usize,
    path_len: usize,
    label_space: u64,
    factory: &dyn Fn(u64, [u64; 2]) -> Box<dyn NodeAutomaton>,
    xs: &[Vec<Beep>],
    horizon: Round,
) -> Option<Vec<u64>> {
    let n = path_len + 1 + 4 * k;
    let mut labels = vec![u64::MAX; n];
    let mut free: BTreeSet<u64> = (0..label_space).collect();
    let take = |free: &mut BTreeSet<u64>| free.pop_first();
    for label in labels.iter_mut().take(path_len + 1) {
        *label = take(&mut free)?;
    }
    for i in 0..k {
        let a = path_len + 1 + 4 * i;
        labels[a] = take(&mut free)?;
        labels[a + 2] = take(&mut free)?;
        let ends = [labels[a], labels[a + 2]];
        let candidates: Vec<u64> = free.iter().copied().collect();
        let (l1, l2) = find_label_collision(&|l| factory(l, ends), &candidates, xs, horizon)?;
        labels[a + 1] = l1;
        labels[a + 3] = l2;
        free.remove(&l1);
        free.remove(&l2);
    }
    Some(labels)
}
