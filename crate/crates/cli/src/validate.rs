//! The invariant suite behind `beepcast validate`.

use anyhow::{bail, ensure, Result};
use beepcast::adversary::{
    build_anonymous_c4_confusion, build_sink_confusion, build_two_node_confusion, find_nondominated_subset,
    is_dominated, AdversarySpec, BeepBudget, SinkConfusion,
};
use beepcast::algorithms::{Algorithm, PackingTag};
use beepcast::codec::{encode_message, Decoder, Message};
use beepcast::engine::{self, run_accelerated, RunConfig};
use beepcast::experiment::{run_instance, sweep, write_csv, EngineMode, FamilyTemplate, Instance};
use beepcast::graph::{make_family, FamilySpec, Labeling};

const ADVERSARIES: [&str; 5] = ["sync", "fixed:5", "random:20", "collision", "collision:7,2"];

fn codec() -> Result<String> {
    let mut d = Decoder::new();
    let mut count = 0;
    let ints = (0..1 << 16).map(Message::Int);
    let triples = (0..1000u64).map(|i| Message::Triple(i, (i * 37) % 1024, (i * 101) % 1024));
    for msg in ints.chain(triples) {
        let out: Vec<Message> = encode_message(msg).iter().filter_map(|b| d.feed(b).transpose()).collect::<Result<_, _>>()?;
        ensure!(out == [msg], "{msg} does not round-trip");
        count += 1;
    }
    Ok(format!("{count} frames round-trip"))
}

fn instances(seed: u64) -> Vec<Instance> {
    let mut out = Vec::new();
    for (algo, family, m_space, labels) in [
        ("fk", "random:15,0.3", 32, "shuffled"),
        ("na", "random:12,0.4", 32, "shuffled"),
        ("na", "cycle:7", 32, "identity"),
        ("adhoc", "path:3", 2, "identity"),
        ("adhoc-psi-l", "cycle:3", 2, "shuffled"),
        ("adhoc-psi-m", "random:4,0.6", 2, "shuffled"),
    ] {
        for adv in ADVERSARIES {
            for s in 0..3 {
                // keep the ad-hoc packs small
                let m = if algo == "adhoc" { 0 } else { s % 2 };
                let mut inst =
                    Instance::new(algo.parse().unwrap(), family.parse::<FamilyTemplate>().unwrap(), m_space, m);
                inst.adversary = adv.parse().unwrap();
                inst.seed = seed * 1000 + s;
                inst.labeling = labels.to_string();
                out.push(inst);
            }
        }
    }
    out
}

fn protocols(seed: u64) -> Result<String> {
    let insts = instances(seed);
    for (inst, r) in insts.iter().zip(sweep(&insts)) {
        let r = r?;
        if let Some(why) = r.failure {
            bail!("{} on {} under {}: {why}", inst.algorithm, inst.family, inst.adversary);
        }
    }
    Ok(format!("{} runs broadcast correctly at the predicted cost", insts.len()))
}

fn engines(seed: u64) -> Result<String> {
    let mut n = 0;
    for algo in ["na", "fk", "unary", "adhoc-psi-m"] {
        let alg: Algorithm = algo.parse()?;
        for adv in ADVERSARIES {
            let adv: AdversarySpec = adv.parse().map_err(anyhow::Error::msg)?;
            let g = make_family(
                &FamilySpec::RandomConnected { n: 4, p: 0.6, seed },
                &Labeling::Shuffled { seed },
                Some(4),
                2,
            )?;
            let m = if matches!(alg, Algorithm::AdHoc(_)) { 0 } else { 1 };
            let cfg = RunConfig::with_limits(1 << 40, 1 << 40);
            let a = engine::run(&g, &mut alg.build(&g, m)?, adv.build(seed).as_mut(), &cfg)?;
            let b = run_accelerated(&g, &mut alg.build(&g, m)?, adv.build(seed).as_mut(), &cfg)?;
            ensure!(a == b, "{alg} under {adv}: engines disagree");
            n += 1;
        }
    }
    Ok(format!("{n} reference/accelerated pairs identical"))
}

fn dominated(seed: u64) -> Result<String> {
    // doubling sets are dominated
    for k in 1..=25u32 {
        let set: Vec<u64> = (0..k).map(|i| (seed % 5 + 1) << i).collect();
        ensure!(is_dominated(&set)?, "{set:?} should be dominated");
        ensure!(*set.last().unwrap() >= 1 << (k - 1), "lemma fails on {set:?}");
        let budget: BeepBudget = set.iter().enumerate().map(|(i, &b)| (i as u64 + 1, b)).collect();
        ensure!(find_nondominated_subset(&budget).is_none(), "subset found in a dominated budget");
    }
    let budget: BeepBudget = [(1, 3), (2, 4), (3, 5)].into();
    ensure!(find_nondominated_subset(&budget).is_some(), "no subset found for {budget:?}");
    Ok("dominated sets have an exponential maximum".into())
}

fn demos() -> Result<String> {
    for (k1, k2) in [(1, 2), (3, 5), (4, 4)] {
        build_two_node_confusion(k1, k2)?.verify().map_err(anyhow::Error::msg)?;
    }
    build_anonymous_c4_confusion(&"echo".parse()?, 0, 1)?.verify().map_err(anyhow::Error::msg)?;
    match build_sink_confusion(&"unary".parse()?, 6, 0, 1)? {
        SinkConfusion::Confused(rep) => rep.verify().map_err(anyhow::Error::msg)?,
        SinkConfusion::Dominated { .. } => bail!("unary strawman reported dominated"),
    }
    match build_sink_confusion(&Algorithm::AdHoc(PackingTag::Phi), 5, 0, 1)? {
        SinkConfusion::Dominated { .. } => {}
        SinkConfusion::Confused(_) => bail!("ad-hoc at L=5 was confused"),
    }
    Ok("all confusion reports verify from their traces".into())
}

fn determinism(seed: u64) -> Result<String> {
    let mut insts = instances(seed);
    insts.truncate(30);
    for i in &mut insts {
        i.mode = EngineMode::Reference;
    }
    let csv = || -> Result<(Vec<u8>, String)> {
        let mut buf = Vec::new();
        let mut traces = String::new();
        for inst in &insts {
            let r = run_instance(inst)?;
            traces.push_str(&r.outcome.trace.to_lines());
            write_csv([&r.row], &mut buf)?;
        }
        Ok((buf, traces))
    };
    ensure!(csv()? == csv()?, "repeated runs differ");
    Ok(format!("{} instances reproduce byte for byte", insts.len()))
}

/// Prints one line per check; fails if any check does.
pub fn run(seed: u64) -> Result<()> {
    let checks: [(&str, Box<dyn Fn() -> Result<String>>); 6] = [
        ("codec", Box::new(codec)),
        ("protocols", Box::new(move || protocols(seed))),
        ("engines", Box::new(move || engines(seed))),
        ("dominated", Box::new(move || dominated(seed))),
        ("demos", Box::new(demos)),
        ("determinism", Box::new(move || determinism(seed))),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("check {name}: PASS ({detail})"),
            Err(e) => {
                failed += 1;
                println!("check {name}: FAIL ({e:#})");
            }
        }
    }
    if failed > 0 {
        bail!("{failed} checks failed");
    }
    Ok(())
}
