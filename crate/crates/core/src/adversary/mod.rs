//! Delivery schedulers.
//!
//! An adversary picks the delivery round of every sent beep when it is sent.
//! Every built-in scheduler keeps per-sender FIFO order with distinct delivery
//! rounds, and answers run-level requests with exactly the rounds it would
//! have chosen beep by beep.

pub mod confusion;
pub mod dominated;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{Beep, Message};
use crate::engine::{Round, Trace};
use crate::graph::{LabeledGraph, NodeId};

pub use confusion::{
    all_sequences, beeps_sent_alone, build_anonymous_c4_confusion, build_sink_confusion,
    build_two_node_confusion, chain_collision_labels, find_label_collision,
    prefix_confusion_schedules, ConfusionError, ConfusionReport, LabeledFactory, SinkConfusion,
};
pub use dominated::{find_nondominated_subset, is_dominated, BeepBudget, DominatedError};

/// Delivery rounds at or beyond this value stand for "withheld": they are
/// never reached within any run limit.
pub const PARKED: Round = 1 << 62;

/// What the adversary may look at when deciding: the whole execution so far.
pub struct ScheduleContext<'a> {
    pub round: Round,
    pub graph: &'a LabeledGraph,
    /// Beeps heard so far, per node.
    pub heard: &'a [u64],
    pub outputs: &'a [Option<Message>],
    pub trace: &'a Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentBeep {
    pub sender: NodeId,
    pub seq: u64,
    pub kind: Beep,
    pub send_round: Round,
}

/// `count` beeps of one kind, beep `i` sent in `send_round + i` with sequence
/// number `seq0 + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentRun {
    pub sender: NodeId,
    pub seq0: u64,
    pub kind: Beep,
    pub count: u64,
    pub send_round: Round,
}

/// `count` beeps delivered in consecutive rounds from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeliveryRun {
    pub start: Round,
    pub count: u64,
}

pub trait Adversary: Send {
    fn schedule(&mut self, ctx: &ScheduleContext<'_>, beep: &SentBeep) -> Round;

    /// Delivery blocks covering a send run in order. The default asks
    /// [`Adversary::schedule`] for every beep.
    fn schedule_run(&mut self, ctx: &ScheduleContext<'_>, run: &SentRun) -> Vec<DeliveryRun> {
        let mut blocks = Vec::new();
        for i in 0..run.count {
            let beep = SentBeep {
                sender: run.sender,
                seq: run.seq0 + i,
                kind: run.kind,
                send_round: run.send_round + i,
            };
            push_block(&mut blocks, self.schedule(ctx, &beep), 1);
        }
        blocks
    }

    fn name(&self) -> String;
}

fn push_block(blocks: &mut Vec<DeliveryRun>, start: Round, count: u64) {
    if let Some(last) = blocks.last_mut() {
        if last.start + last.count == start {
            last.count += count;
            return;
        }
    }
    blocks.push(DeliveryRun { start, count });
}

/// Last delivery round per sender.
#[derive(Debug, Clone, Default)]
struct FifoBook(HashMap<NodeId, Round>);

impl FifoBook {
    fn last(&self, sender: NodeId) -> Option<Round> {
        self.0.get(&sender).copied()
    }

    /// Earliest round that is at least `at` and after the previous delivery.
    fn floor(&self, sender: NodeId, at: Round) -> Round {
        self.last(sender).map_or(at, |l| at.max(l + 1))
    }

    fn set(&mut self, sender: NodeId, round: Round) {
        self.0.insert(sender, round);
    }
}

/// Every beep delivered `delay` rounds after sending (pushed later if needed
/// to stay FIFO). `delay = 0` is the synchronous adversary.
#[derive(Debug, Clone, Default)]
pub struct FixedDelay {
    delay: u64,
    book: FifoBook,
}

impl FixedDelay {
    pub fn new(delay: u64) -> Self {
        FixedDelay { delay, book: FifoBook::default() }
    }

    pub fn synchronous() -> Self {
        Self::new(0)
    }
}

impl Adversary for FixedDelay {
    fn schedule(&mut self, _ctx: &ScheduleContext<'_>, beep: &SentBeep) -> Round {
        let at = self.book.floor(beep.sender, beep.send_round + self.delay);
        self.book.set(beep.sender, at);
        at
    }

    fn schedule_run(&mut self, _ctx: &ScheduleContext<'_>, run: &SentRun) -> Vec<DeliveryRun> {
        // later beeps are sent one round apart, so they follow contiguously
        let start = self.book.floor(run.sender, run.send_round + self.delay);
        self.book.set(run.sender, start + run.count - 1);
        vec![DeliveryRun { start, count: run.count }]
    }

    fn name(&self) -> String {
        if self.delay == 0 {
            "sync".into()
        } else {
            format!("fixed:{}", self.delay)
        }
    }
}

/// Delays drawn uniformly from `[0, max_delay]` per beep, then pushed forward
/// minimally to restore FIFO order. Draws are keyed by `(seed, sender, seq)`.
#[derive(Debug, Clone)]
pub struct SeededRandom {
    max_delay: u64,
    rng: ChaCha8Rng,
    book: FifoBook,
}

impl SeededRandom {
    pub fn new(max_delay: u64, seed: u64) -> Self {
        SeededRandom {
            max_delay,
            rng: ChaCha8Rng::seed_from_u64(seed),
            book: FifoBook::default(),
        }
    }

    fn delay(&mut self, sender: NodeId, seq: u64) -> u64 {
        self.rng.set_stream(sender as u64);
        self.rng.set_word_pos(seq as u128 * 16);
        self.rng.gen_range(0..=self.max_delay)
    }
}

impl Adversary for SeededRandom {
    fn schedule(&mut self, _ctx: &ScheduleContext<'_>, beep: &SentBeep) -> Round {
        let d = self.delay(beep.sender, beep.seq);
        let at = self.book.floor(beep.sender, beep.send_round + d);
        self.book.set(beep.sender, at);
        at
    }

    fn schedule_run(&mut self, _ctx: &ScheduleContext<'_>, run: &SentRun) -> Vec<DeliveryRun> {
        let mut blocks = Vec::new();
        let mut j = 0;
        while j < run.count {
            let send = run.send_round + j;
            if let Some(last) = self.book.last(run.sender) {
                if last + 1 >= send + self.max_delay {
                    // The backlog already exceeds any possible draw; the rest
                    // of the run follows back to back.
                    let rest = run.count - j;
                    push_block(&mut blocks, last + 1, rest);
                    self.book.set(run.sender, last + rest);
                    break;
                }
            }
            let d = self.delay(run.sender, run.seq0 + j);
            let at = self.book.floor(run.sender, send + d);
            self.book.set(run.sender, at);
            push_block(&mut blocks, at, 1);
            j += 1;
        }
        blocks
    }

    fn name(&self) -> String {
        format!("random:{}", self.max_delay)
    }
}

/// Delivers only inside the first `window` rounds of every `period`, so all
/// senders with a backlog release it in lockstep.
///
/// In any delivery round, every sender that has a sent but undelivered beep
/// delivers one. A receiver therefore gets a lone beep only when no other
/// neighbor has anything outstanding.
#[derive(Debug, Clone)]
pub struct CollisionMaximizer {
    period: u64,
    window: u64,
    book: FifoBook,
}

impl CollisionMaximizer {
    pub const DEFAULT_PERIOD: u64 = 64;
    pub const DEFAULT_WINDOW: u64 = 32;

    pub fn new(period: u64, window: u64) -> Self {
        assert!(period >= 1 && (1..=period).contains(&window), "need 1 <= window <= period");
        CollisionMaximizer { period, window, book: FifoBook::default() }
    }

    fn open_round(&self, at: Round) -> Round {
        if at % self.period < self.window {
            at
        } else {
            (at / self.period + 1) * self.period
        }
    }
}

impl Default for CollisionMaximizer {
    fn default() -> Self {
        Self::new(Self::DEFAULT_PERIOD, Self::DEFAULT_WINDOW)
    }
}

impl Adversary for CollisionMaximizer {
    fn schedule(&mut self, _ctx: &ScheduleContext<'_>, beep: &SentBeep) -> Round {
        let at = self.open_round(self.book.floor(beep.sender, beep.send_round));
        self.book.set(beep.sender, at);
        at
    }

    fn schedule_run(&mut self, _ctx: &ScheduleContext<'_>, run: &SentRun) -> Vec<DeliveryRun> {
        let mut blocks = Vec::new();
        let mut j = 0;
        while j < run.count {
            let at = self.open_round(self.book.floor(run.sender, run.send_round + j));
            let room = self.window - at % self.period;
            let take = room.min(run.count - j);
            push_block(&mut blocks, at, take);
            self.book.set(run.sender, at + take - 1);
            j += take;
        }
        blocks
    }

    fn name(&self) -> String {
        format!("collision:{},{}", self.period, self.window)
    }
}

/// Treatment of beeps a [`Scripted`] adversary has no explicit plan for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    /// Deliver in the send round (or right after the previous delivery).
    Sync,
    /// Withhold indefinitely.
    Park,
    /// Synchronous until the sender has heard a beep, withheld afterwards.
    ParkAfterHeard,
}

/// Explicit delivery rounds for chosen beeps, with a fallback policy for the
/// rest.
#[derive(Debug, Clone)]
pub struct Scripted {
    plans: HashMap<NodeId, Vec<Round>>,
    policies: HashMap<NodeId, Fallback>,
    default: Fallback,
    book: FifoBook,
}

impl Scripted {
    pub fn new(default: Fallback) -> Self {
        Scripted {
            plans: HashMap::new(),
            policies: HashMap::new(),
            default,
            book: FifoBook::default(),
        }
    }

    /// Beep `i` of `node` is delivered in `rounds[i]`.
    pub fn with_plan(mut self, node: NodeId, rounds: Vec<Round>) -> Self {
        self.plans.insert(node, rounds);
        self
    }

    pub fn with_policy(mut self, node: NodeId, policy: Fallback) -> Self {
        self.policies.insert(node, policy);
        self
    }

    fn fallback_round(&self, ctx: &ScheduleContext<'_>, sender: NodeId, send: Round) -> Round {
        let policy = self.policies.get(&sender).copied().unwrap_or(self.default);
        let park = match policy {
            Fallback::Sync => false,
            Fallback::Park => true,
            Fallback::ParkAfterHeard => ctx.heard[sender] > 0,
        };
        self.book.floor(sender, if park { PARKED.max(send) } else { send })
    }

    fn planned(&self, sender: NodeId, seq: u64) -> Option<Round> {
        self.plans.get(&sender).and_then(|p| p.get(seq as usize)).copied()
    }
}

impl Adversary for Scripted {
    fn schedule(&mut self, ctx: &ScheduleContext<'_>, beep: &SentBeep) -> Round {
        let at = self
            .planned(beep.sender, beep.seq)
            .unwrap_or_else(|| self.fallback_round(ctx, beep.sender, beep.send_round));
        self.book.set(beep.sender, at);
        at
    }

    fn schedule_run(&mut self, ctx: &ScheduleContext<'_>, run: &SentRun) -> Vec<DeliveryRun> {
        let mut blocks = Vec::new();
        let mut j = 0;
        while j < run.count {
            let seq = run.seq0 + j;
            if let Some(at) = self.planned(run.sender, seq) {
                push_block(&mut blocks, at, 1);
                self.book.set(run.sender, at);
                j += 1;
                continue;
            }
            // Unplanned from here on: the fallback yields one contiguous block.
            let start = self.fallback_round(ctx, run.sender, run.send_round + j);
            let rest = run.count - j;
            push_block(&mut blocks, start, rest);
            self.book.set(run.sender, start + rest - 1);
            break;
        }
        blocks
    }

    fn name(&self) -> String {
        "scripted".into()
    }
}

/// Named built-in adversaries, as used in configs and CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversarySpec {
    Sync,
    Fixed(u64),
    Random(u64),
    Collision { period: u64, window: u64 },
}

impl AdversarySpec {
    pub fn build(&self, seed: u64) -> Box<dyn Adversary> {
        match *self {
            AdversarySpec::Sync => Box::new(FixedDelay::synchronous()),
            AdversarySpec::Fixed(d) => Box::new(FixedDelay::new(d)),
            AdversarySpec::Random(max) => Box::new(SeededRandom::new(max, seed)),
            AdversarySpec::Collision { period, window } => {
                Box::new(CollisionMaximizer::new(period, window))
            }
        }
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::Sync => write!(f, "sync"),
            AdversarySpec::Fixed(d) => write!(f, "fixed:{d}"),
            AdversarySpec::Random(m) => write!(f, "random:{m}"),
            AdversarySpec::Collision { period, window } => write!(f, "collision:{period},{window}"),
        }
    }
}

impl FromStr for AdversarySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, arg) = s.split_once(':').map_or((s, None), |(h, a)| (h, Some(a)));
        let num = |a: Option<&str>| -> Result<u64, String> {
            a.ok_or_else(|| format!("{head} needs a parameter"))?
                .parse()
                .map_err(|_| format!("bad parameter in {s:?}"))
        };
        match head {
            "sync" if arg.is_none() => Ok(AdversarySpec::Sync),
            "fixed" => Ok(AdversarySpec::Fixed(num(arg)?)),
            "random" => Ok(AdversarySpec::Random(num(arg)?)),
            "collision" => match arg {
                None => Ok(AdversarySpec::Collision {
                    period: CollisionMaximizer::DEFAULT_PERIOD,
                    window: CollisionMaximizer::DEFAULT_WINDOW,
                }),
                Some(a) => {
                    let (p, w) = a.split_once(',').ok_or("collision:PERIOD,WINDOW")?;
                    let period: u64 = p.parse().map_err(|_| format!("bad period {p:?}"))?;
                    let window: u64 = w.parse().map_err(|_| format!("bad window {w:?}"))?;
                    if period == 0 || window == 0 || window > period {
                        return Err("need 1 <= window <= period".into());
                    }
                    Ok(AdversarySpec::Collision { period, window })
                }
            },
            _ => Err(format!("unknown adversary {s:?}")),
        }
    }
}
