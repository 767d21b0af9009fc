use beepcast::adversary::{
    all_sequences, beeps_sent_alone, build_anonymous_c4_confusion, build_sink_confusion, build_two_node_confusion,
    chain_collision_labels, find_label_collision, SinkConfusion,
};
use beepcast::algorithms::{Algorithm, NeighborhoodAwareNode, PackingTag};
use beepcast::codec::{Beep, Message};
use beepcast::engine::{Event, NodeAutomaton};
use beepcast::graph::{make_family, FamilySpec, Labeling};

#[test]
fn two_node_uniform_confusion() {
    for (k1, k2) in [(1, 2), (3, 5), (4, 4), (5, 3)] {
        let rep = build_two_node_confusion(k1, k2).unwrap();
        rep.verify().unwrap();
        assert!(rep.wrong_execution().is_some(), "{}", rep.summary());
        assert_eq!(rep.outputs.0, rep.outputs.1);
        if k1 == k2 {
            assert_eq!(rep.divergence_round, None);
        }
        assert!(rep.divergence_round.is_none_or(|d| d > rep.output_round));
    }
}

#[test]
fn anonymous_cycle_confusion() {
    let rep = build_anonymous_c4_confusion(&"echo".parse().unwrap(), 0, 2).unwrap();
    rep.verify().unwrap();
    assert_eq!(rep.victims, (2, 2));
    assert!(rep.wrong_execution().is_some());
    let soft_at_c = rep.trace_a.records().iter().chain(rep.trace_b.records()).any(|r| {
        matches!(r.event, Event::Heard { node: 2, kind: Beep::Soft })
    });
    assert!(!soft_at_c);
}

#[test]
fn sink_confusion_defeats_unary_strawman() {
    let alg: Algorithm = "unary".parse().unwrap();
    let SinkConfusion::Confused(rep) = build_sink_confusion(&alg, 6, 0, 1).unwrap() else {
        panic!("expected a report");
    };
    rep.verify().unwrap();
    assert!(rep.wrong_execution().is_some(), "{}", rep.summary());
}

#[test]
fn sink_confusion_pairs_every_slot_at_l4() {
    let alg: Algorithm = "unary".parse().unwrap();
    let SinkConfusion::Confused(rep) = build_sink_confusion(&alg, 4, 0, 1).unwrap() else {
        panic!("expected a report");
    };
    rep.verify().unwrap();
    for t in [&rep.trace_a, &rep.trace_b] {
        let sink = 3;
        assert!(t.heard_history(sink, u64::MAX - 1).iter().all(|&(_, _, k)| k == Beep::Loud));
    }
}

#[test]
fn sink_confusion_reports_dominated_budgets_for_adhoc() {
    let out = build_sink_confusion(&Algorithm::AdHoc(PackingTag::Phi), 5, 0, 1).unwrap();
    let SinkConfusion::Dominated { budget, .. } = out else { panic!("expected dominated budgets") };
    let vals: Vec<u64> = budget.values().copied().collect();
    assert!(beepcast::adversary::is_dominated(&vals).unwrap());
}

#[test]
fn neighborhood_aware_labels_collide() {
    let horizon = 200;
    let xs = all_sequences(3);
    let factory = |l: u64| -> Box<dyn NodeAutomaton> { Box::new(NeighborhoodAwareNode::new(l, vec![0, 15], None)) };
    // what a middle node hears first: the source's [m] and its token
    let frames: Vec<Vec<Beep>> = [vec![Message::Int(1), Message::Triple(0, 2, 0)]]
        .iter()
        .map(|ms| ms.iter().flat_map(|&m| beepcast::codec::encode_message(m).0).collect())
        .collect();
    let mut all = xs.clone();
    all.extend(frames);
    let (a, b) = find_label_collision(&factory, &(1..15).collect::<Vec<_>>(), &all, horizon).unwrap();
    assert!(a < b);
    for x in &all {
        let fa = beeps_sent_alone(factory(a).as_mut(), x, horizon);
        let fb = beeps_sent_alone(factory(b).as_mut(), x, horizon);
        assert_eq!(fa, fb);
    }
    // label 2 is the only one addressed by the token, so it cannot collide
    assert_ne!(a, 2);
    assert_ne!(b, 2);
}

#[test]
fn chain_labels_are_distinct_and_usable() {
    let factory = |l: u64, ends: [u64; 2]| -> Box<dyn NodeAutomaton> {
        Box::new(NeighborhoodAwareNode::new(l, ends.to_vec(), None))
    };
    let labels = chain_collision_labels(2, 2, 32, &factory, &all_sequences(2), 100).unwrap();
    let mut sorted = labels.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), labels.len());
    let g = make_family(&FamilySpec::ChainGk { k: 2, path_len: 2 }, &Labeling::Explicit(labels), Some(32), 2);
    assert!(g.is_ok());
}
