//! Experiment runner for broadcasting with soft and loud beeps.

mod config;
mod expand;
mod validate;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use beepcast::adversary::{
    build_anonymous_c4_confusion, build_sink_confusion, build_two_node_confusion, AdversarySpec, ConfusionError,
    ConfusionReport, SinkConfusion,
};
use beepcast::algorithms::Algorithm;
use beepcast::experiment::{run_instance, sweep, write_csv, EngineMode, ExperimentError, FamilyTemplate, Instance};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "beepcast", version, about = "Broadcast experiments in the asynchronous soft/loud beeping model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one instance and check it against the predicted cost.
    #[command(args_override_self = true)]
    Run(RunArgs),
    /// Build a confusion attack and verify it from its traces.
    #[command(args_override_self = true)]
    Demo(DemoArgs),
    /// Run every combination of the given parameters, one CSV row each.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Run the invariant suite.
    #[command(args_override_self = true)]
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Setup {
    /// Label assignment: identity, shuffled, or a comma-separated list.
    #[arg(long, default_value = "identity")]
    labels: String,
    /// Label space size (defaults to the node count).
    #[arg(long = "L")]
    label_space: Option<u64>,
    /// Message space size (defaults to m + 1, at least 2).
    #[arg(long = "M")]
    message_space: Option<u64>,
    /// The source message.
    #[arg(long, default_value_t = 0)]
    m: u64,
    /// Engine: reference, accelerated, or auto (accelerated for adhoc only).
    #[arg(long, default_value = "auto")]
    mode: String,
    #[arg(long, default_value_t = 1 << 50)]
    max_rounds: u64,
    #[arg(long, default_value_t = 1 << 70)]
    max_cost: u128,
    /// Output directory.
    #[arg(long, env = "BEEPCAST_OUT", default_value = "beepcast-out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// adhoc, adhoc-psi-l, adhoc-psi-m, na, fk, unary, unary:a,b,...
    #[arg(long)]
    algo: String,
    /// path:N, cycle:N, random:N,P, star:L:A,B,... or chain:K,LEN
    #[arg(long)]
    family: String,
    /// sync, fixed:D, random:MAX, collision or collision:P,W
    #[arg(long, default_value = "sync")]
    adv: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the full event trace.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    setup: Setup,
}

#[derive(Args)]
struct SweepArgs {
    /// `;`-separated algorithm tags.
    #[arg(long)]
    algo: String,
    /// Family pattern; `{a..b}` and `{x|y}` expand.
    #[arg(long)]
    family: String,
    /// `;`-separated adversary specs.
    #[arg(long, default_value = "sync")]
    adv: String,
    /// Seeds as `a..b` or a `;`-separated list.
    #[arg(long, default_value = "0")]
    seeds: String,
    #[command(flatten)]
    setup: Setup,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    /// Two nodes, uniform-strength beeps.
    #[value(alias = "two-node")]
    UniformImpossible,
    /// Anonymous four-cycle.
    #[value(alias = "c4")]
    AnonymousImpossible,
    /// Star between a source and a sink, labels only.
    SinkConfusion,
}

#[derive(Args)]
struct DemoArgs {
    which: Demo,
    /// Protocol under attack; defaults to a built-in strawman.
    #[arg(long)]
    target: Option<String>,
    /// Label space of the star.
    #[arg(long = "L", default_value_t = 6)]
    label_space: u64,
    #[arg(long, default_value_t = 0)]
    m1: u64,
    #[arg(long, default_value_t = 1)]
    m2: u64,
    #[arg(long, env = "BEEPCAST_OUT", default_value = "beepcast-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Exit status 1 for failed runs, 2 for bad configuration.
enum Failure {
    Failed(anyhow::Error),
    Config(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn failed<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Failed(e.into())
}

fn classify(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::Engine(_) => failed(e),
        _ => config(e),
    }
}

impl Setup {
    fn instance(&self, algo: &str, family: &str, adv: &str, seed: u64) -> Result<Instance, Failure> {
        let algorithm: Algorithm = algo.parse().map_err(config)?;
        let family: FamilyTemplate = family.parse().map_err(config)?;
        let adversary: AdversarySpec = adv.parse().map_err(|e: String| config(anyhow!(e)))?;
        let mode: EngineMode = self.mode.parse().map_err(config)?;
        let message_space = self.message_space.unwrap_or((self.m + 1).max(2));
        let mut inst = Instance::new(algorithm, family, message_space, self.m);
        inst.labeling = self.labels.clone();
        inst.label_space = self.label_space;
        inst.adversary = adversary;
        inst.seed = seed;
        inst.mode = mode;
        inst.max_rounds = self.max_rounds;
        inst.max_cost = self.max_cost;
        Ok(inst)
    }
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(failed)
}

fn cmd_run(args: &RunArgs) -> Outcome {
    let inst = args.setup.instance(&args.algo, &args.family, &args.adv, args.seed)?;
    let result = run_instance(&inst).map_err(classify)?;
    let mut csv = Vec::new();
    write_csv([&result.row], &mut csv).map_err(failed)?;
    print!("{}", String::from_utf8_lossy(&csv));
    let out = &args.setup.out;
    create_dir(out)?;
    std::fs::write(out.join("run.csv"), &csv).map_err(failed)?;
    if args.trace {
        let file = std::fs::File::create(out.join("trace.txt")).map_err(failed)?;
        result.outcome.trace.write_lines(std::io::BufWriter::new(file)).map_err(failed)?;
    }
    match result.failure {
        None => {
            eprintln!("ok: all {} nodes output {}; cost {}", result.row.n, inst.message, result.outcome.cost);
            Ok(())
        }
        Some(why) => Err(failed(anyhow!(why))),
    }
}

fn cmd_sweep(args: &SweepArgs) -> Outcome {
    let algos = expand::expand_list(&args.algo).map_err(config)?;
    let families = expand::expand(&args.family).map_err(config)?;
    let advs = expand::expand_list(&args.adv).map_err(config)?;
    let seeds = expand::seeds(&args.seeds).map_err(config)?;
    let mut instances = Vec::new();
    for algo in &algos {
        for family in &families {
            for adv in &advs {
                for &seed in &seeds {
                    instances.push(args.setup.instance(algo, family, adv, seed)?);
                }
            }
        }
    }
    let mut rows = Vec::new();
    let mut failures = 0;
    for (inst, result) in instances.iter().zip(sweep(&instances)) {
        let result = result.map_err(classify)?;
        if let Some(why) = &result.failure {
            failures += 1;
            eprintln!("FAIL {} {} {} seed {}: {why}", inst.algorithm, inst.family, inst.adversary, inst.seed);
        }
        rows.push(result.row);
    }
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).map_err(failed)?;
    print!("{}", String::from_utf8_lossy(&csv));
    create_dir(&args.setup.out)?;
    std::fs::write(args.setup.out.join("sweep.csv"), &csv).map_err(failed)?;
    eprintln!("{} rows, {failures} failed", rows.len());
    if failures > 0 {
        return Err(failed(anyhow!("{failures} instances failed")));
    }
    Ok(())
}

fn demo_name(which: Demo) -> &'static str {
    match which {
        Demo::UniformImpossible => "uniform-impossible",
        Demo::AnonymousImpossible => "anonymous-impossible",
        Demo::SinkConfusion => "sink-confusion",
    }
}

fn confusion_failure(e: ConfusionError) -> Failure {
    match e {
        ConfusionError::BadParameters(_) | ConfusionError::Algorithm(_) | ConfusionError::Graph(_) => config(e),
        _ => failed(e),
    }
}

fn report(rep: &ConfusionReport, dir: &Path) -> Outcome {
    rep.write_to(dir).map_err(failed)?;
    print!("{}", rep.summary());
    rep.verify().map_err(|e| failed(anyhow!("attack did not verify: {e}")))?;
    eprintln!("confused: identical victim histories up to round {}", rep.output_round);
    Ok(())
}

fn cmd_demo(args: &DemoArgs) -> Outcome {
    let dir = args.out.join(format!("demo-{}", demo_name(args.which)));
    let target = |default: &str| -> Result<Algorithm, Failure> {
        args.target.as_deref().unwrap_or(default).parse().map_err(config)
    };
    match args.which {
        Demo::UniformImpossible => {
            let Algorithm::Unary { counts: Some(c), .. } = target("unary:3,5")? else {
                return Err(config(anyhow!("the two-node demo targets unary:a,b")));
            };
            let [k1, k2] = c[..] else {
                return Err(config(anyhow!("the two-node demo needs exactly two counts")));
            };
            report(&build_two_node_confusion(k1, k2).map_err(confusion_failure)?, &dir)
        }
        Demo::AnonymousImpossible => {
            let alg = target("echo")?;
            report(&build_anonymous_c4_confusion(&alg, args.m1, args.m2).map_err(confusion_failure)?, &dir)
        }
        Demo::SinkConfusion => {
            let alg = target("unary")?;
            match build_sink_confusion(&alg, args.label_space, args.m1, args.m2).map_err(confusion_failure)? {
                SinkConfusion::Confused(rep) => report(&rep, &dir),
                SinkConfusion::Dominated { message, budget } => {
                    let mut s = format!("attack=sink-confusion\ntarget={alg}\nL={}\n", args.label_space);
                    let _ = writeln!(s, "inapplicable: budgets dominated for message {message}");
                    for (label, beeps) in &budget {
                        let _ = writeln!(s, "budget[{label}]={beeps}");
                    }
                    create_dir(&dir)?;
                    std::fs::write(dir.join("summary.txt"), &s).map_err(failed)?;
                    print!("{s}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Demo(a) => cmd_demo(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Validate(a) => validate::run(a.seed).map_err(failed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Failed(e)) => {
            eprintln!("failed: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
