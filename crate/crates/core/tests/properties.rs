use std::collections::{BTreeSet, HashMap};

use beepcast::adversary::{is_dominated, AdversarySpec};
use beepcast::algorithms::Algorithm;
use beepcast::analysis::predict_cost;
use beepcast::codec::{Beep, Message};
use beepcast::engine::{run, run_accelerated, Event, Outcome, Round, RunConfig, Termination};
use beepcast::graph::{make_family, FamilySpec, LabeledGraph, Labeling};
use proptest::prelude::*;

mod common;
use common::{beeps, check_disjoint, check_model, expand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ADVERSARIES: [&str; 5] = ["sync", "fixed:5", "random:20", "collision", "collision:9,3"];

fn random_graph(n: usize, p: f64, seed: u64, m_space: u64) -> LabeledGraph {
    make_family(
        &FamilySpec::RandomConnected { n, p, seed },
        &Labeling::Shuffled { seed },
        Some(n as u64 + 2),
        m_space,
    )
    .unwrap()
}

fn exec(alg: &Algorithm, g: &LabeledGraph, m: u64, adv: &str, seed: u64) -> Outcome {
    let mut automata = alg.build(g, m).unwrap();
    let mut adv = adv.parse::<AdversarySpec>().unwrap().build(seed);
    let cfg = RunConfig::with_limits(1 << 50, 1 << 70);
    let o = if alg.prefers_accelerated() {
        run_accelerated(g, &mut automata, adv.as_mut(), &cfg)
    } else {
        run(g, &mut automata, adv.as_mut(), &cfg)
    }
    .unwrap();
    assert_eq!(o.termination, Termination::Quiescent);
    o
}

/// When a collision window opens, every sender with a backlog toward a node
/// delivers in that round, so a backlog from two senders is never heard as a
/// lone soft beep.
fn check_window_release(o: &Outcome, period: Round, window: Round) {
    let b = beeps(&o.trace);
    let mut heard: HashMap<(usize, Round), Beep> = HashMap::new();
    for (round, ev) in expand(&o.trace) {
        if let Event::Heard { node, kind } = ev {
            heard.insert((node, round), kind);
        }
    }
    // (receiver, open round) -> senders with a backlog, and senders delivering then
    let mut backlog: HashMap<(usize, Round), BTreeSet<usize>> = HashMap::new();
    let mut at_open: HashMap<(usize, Round), BTreeSet<usize>> = HashMap::new();
    for (&(sender, seq), &(_, sent)) in &b.sent {
        for &(receiver, round) in &b.delivered[&(sender, seq)] {
            assert!(round % period < window);
            let first_open = (sent / period + 1) * period;
            for open in (first_open..=round).step_by(period as usize) {
                backlog.entry((receiver, open)).or_default().insert(sender);
            }
            if round % period == 0 {
                at_open.entry((receiver, round)).or_default().insert(sender);
            }
        }
    }
    for (key, senders) in backlog {
        let delivering = at_open.get(&key).cloned().unwrap_or_default();
        assert!(senders.is_subset(&delivering), "backlog at {key:?} held back");
        if senders.len() >= 2 {
            assert_ne!(heard.get(&key), Some(&Beep::Soft));
        }
    }
}

/// Each node outputs at most once, and only `m` when `m` is given.
fn check_outputs_final(o: &Outcome, m: Option<u64>) {
    let mut seen = BTreeSet::new();
    for r in o.trace.records() {
        if let Event::Output { node, msg } = r.event {
            if let Some(m) = m {
                assert_eq!(msg, Message::Int(m));
            }
            assert!(seen.insert(node), "node {node} output twice");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn model_constraints_hold_in_every_trace(
        n in 2usize..8,
        p in 0.2f64..1.0,
        seed in 0u64..10_000,
        m in 0u64..4,
        alg in prop::sample::select(vec!["na", "fk", "unary", "adhoc"]),
        adv in prop::sample::select(ADVERSARIES.to_vec()),
    ) {
        let g = random_graph(n, p, seed, 4);
        let alg: Algorithm = alg.parse().unwrap();
        if let Algorithm::AdHoc(tag) = alg {
            let packing = tag.resolve(&g);
            prop_assume!(g.labels().iter().all(|l| packing.pack(l.0, m).unwrap() <= 5));
        }
        let o = exec(&alg, &g, m, adv, seed);
        check_model(&g, &o);
        // the strawman is allowed to be fooled
        let correct = !matches!(alg, Algorithm::Unary { .. });
        check_outputs_final(&o, correct.then_some(m));
    }

    #[test]
    fn na_and_fk_frames_occupy_disjoint_segments(
        n in 2usize..10,
        p in 0.2f64..1.0,
        seed in 0u64..10_000,
        m in 0u64..8,
        alg in prop::sample::select(vec!["na", "fk"]),
        adv in prop::sample::select(ADVERSARIES.to_vec()),
    ) {
        let g = random_graph(n, p, seed, 8);
        check_disjoint(&exec(&alg.parse().unwrap(), &g, m, adv, seed));
    }

    #[test]
    fn collision_windows_release_backlogs_together(
        n in 3usize..8,
        p in 0.3f64..1.0,
        seed in 0u64..10_000,
        period in 2u64..12,
        alg in prop::sample::select(vec!["na", "fk", "unary"]),
    ) {
        let window = 1 + seed % period;
        let g = random_graph(n, p, seed, 4);
        let o = exec(&alg.parse().unwrap(), &g, 3, &format!("collision:{period},{window}"), seed);
        check_window_release(&o, period, window);
    }

    #[test]
    fn cost_does_not_depend_on_the_schedule(
        n in 2usize..9,
        p in 0.2f64..1.0,
        seed in 0u64..10_000,
        m in 0u64..4,
        alg in prop::sample::select(vec!["na", "fk", "adhoc", "adhoc-psi-m"]),
    ) {
        let g = random_graph(n, p, seed, 4);
        let alg: Algorithm = alg.parse().unwrap();
        let predicted = predict_cost(&alg, &g, m);
        prop_assume!(predicted.as_ref().is_ok_and(|p| p.exact_total < 1 << 22));
        let predicted = predicted.unwrap();
        for adv in ADVERSARIES {
            let o = exec(&alg, &g, m, adv, seed);
            prop_assert_eq!(o.cost, predicted.exact_total);
            prop_assert_eq!(&o.sent_per_node, &predicted.per_node);
        }
    }
}

/// Sorted increasingly, each element exceeds the sum of the previous ones.
fn random_dominated(rng: &mut ChaCha8Rng, k: usize) -> Vec<u64> {
    let mut v = Vec::with_capacity(k);
    let mut prefix = 0u64;
    for _ in 0..k {
        let x = prefix + 1 + rng.gen_range(0..=prefix.max(99));
        v.push(x);
        prefix += x;
    }
    v
}

#[test]
fn dominated_sets_have_an_exponential_maximum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let k = rng.gen_range(1..=25);
        let mut set = random_dominated(&mut rng, k);
        set.reverse();
        assert!(is_dominated(&set).unwrap());
        assert!(*set.iter().max().unwrap() >= 1 << (k - 1));
    }
}
