use std::path::Path;
use std::process::{Command, Output};

fn beepcast(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beepcast"))
        .args(args)
        .env("BEEPCAST_OUT", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV data rows as field vectors.
fn rows(o: &Output) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn run_fk_on_path3_costs_32() {
    let dir = tempfile::tempdir().unwrap();
    let o = beepcast(dir.path(), &["run", "--algo", "fk", "--family", "path:3", "--m", "2", "--adv", "sync", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&o);
    assert_eq!(r.len(), 1);
    assert_eq!((r[0][6].as_str(), r[0][7].as_str()), ("32", "32"));
    assert!(dir.path().join("run.csv").exists());
}

#[test]
fn run_na_on_a_random_graph() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--algo", "na", "--family", "random:20,0.3", "--m", "5", "--adv", "random:50", "--seed", "7"];
    let o = beepcast(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &rows(&o)[0];
    assert_eq!(r[1], "20");
    assert_eq!(r[6], r[7]);
}

#[test]
fn run_adhoc_reference_costs_130() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--algo", "adhoc", "--family", "path:2", "--m", "0", "--mode", "reference", "--labels", "0,1"];
    let o = beepcast(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rows(&o)[0][7], "130");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "# fk on a short path\nalgo = fk\nfamily = path:4\nm = 2\nM = 4\n").unwrap();
    let o = beepcast(dir.path(), &["run", "--config", cfg.to_str().unwrap(), "--m", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &rows(&o)[0];
    assert_eq!((r[0].as_str(), r[1].as_str(), r[5].as_str()), ("fk", "4", "3"));
    // 2(n-1) frames of 4 + 2*bitlen(3) beeps
    assert_eq!(r[7], "48");
}

#[test]
fn identical_configs_give_identical_artifacts() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let cfg = cfg_dir.path().join("exp.cfg");
    std::fs::write(&cfg, "algo = na\nfamily = random:9,0.5\nm = 3\nadv = random:20\nseed = 11\nlabels = shuffled\nL = 15\ntrace = true\n")
        .unwrap();
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let o = beepcast(dir.path(), &["run", "--config", cfg.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0));
            let csv = std::fs::read(dir.path().join("run.csv")).unwrap();
            let trace = std::fs::read(dir.path().join("trace.txt")).unwrap();
            (csv, trace)
        })
        .collect();
    assert!(!runs[0].1.is_empty());
    assert!(runs[0] == runs[1]);
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_m = beepcast(dir.path(), &["run", "--algo", "fk", "--family", "path:3", "--m", "9", "--M", "4"]);
    assert_eq!(bad_m.status.code(), Some(2));
    let bad_algo = beepcast(dir.path(), &["run", "--algo", "bfs", "--family", "path:3"]);
    assert_eq!(bad_algo.status.code(), Some(2));
    let bad_family = beepcast(dir.path(), &["run", "--algo", "fk", "--family", "tree:3"]);
    assert_eq!(bad_family.status.code(), Some(2));
    let missing = beepcast(dir.path(), &["run", "--config", "/nonexistent.cfg"]);
    assert_eq!(missing.status.code(), Some(2));
    let cut = beepcast(dir.path(), &["run", "--algo", "fk", "--family", "path:5", "--max-rounds", "5"]);
    assert_eq!(cut.status.code(), Some(1));
    assert_eq!(rows(&cut)[0][7], "FAIL");
}

#[test]
fn demos_succeed_or_report_dominated_budgets() {
    let dir = tempfile::tempdir().unwrap();
    for target in ["unary:1,2", "unary:3,5", "unary:4,4"] {
        let o = beepcast(dir.path(), &["demo", "uniform-impossible", "--target", target]);
        assert_eq!(o.status.code(), Some(0), "{target}");
        assert!(stdout(&o).contains("verified=true"));
    }
    let files = dir.path().join("demo-uniform-impossible");
    for f in ["summary.txt", "trace_a.txt", "trace_b.txt"] {
        assert!(files.join(f).exists());
    }
    let c4 = beepcast(dir.path(), &["demo", "anonymous-impossible"]);
    assert_eq!(c4.status.code(), Some(0));
    let sink = beepcast(dir.path(), &["demo", "sink-confusion", "--target", "unary", "--L", "6"]);
    assert_eq!(sink.status.code(), Some(0));
    let dominated = beepcast(dir.path(), &["demo", "sink-confusion", "--target", "adhoc", "--L", "5"]);
    assert_eq!(dominated.status.code(), Some(0));
    assert!(stdout(&dominated).contains("inapplicable: budgets dominated"));
    let bad = beepcast(dir.path(), &["demo", "uniform-impossible", "--target", "na"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sweep_fk_over_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = beepcast(dir.path(), &["sweep", "--algo", "fk", "--family", "path:{2..40}", "--m", "5", "--M", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&o);
    assert_eq!(r.len(), 39);
    for row in &r {
        let n: u64 = row[1].parse().unwrap();
        // len([5]) = 4 + 2*3
        assert_eq!(row[7], (2 * (n - 1) * 10).to_string());
    }
    assert_eq!(std::fs::read(dir.path().join("sweep.csv")).unwrap(), o.stdout);
}

#[test]
fn sweep_na_cost_grows_with_density() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--algo", "na", "--family", "random:10,{0.2|0.5|0.9}", "--seeds", "0..10", "--m", "5", "--M", "8",
        "--labels", "shuffled", "--L", "16", "--adv", "sync;random:20",
    ];
    let o = beepcast(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&o);
    assert_eq!(r.len(), 60);
    let mean_cost = |chunk: &[Vec<String>]| {
        chunk.iter().map(|x| x[7].parse::<f64>().unwrap()).sum::<f64>() / chunk.len() as f64
    };
    let means: Vec<f64> = r.chunks(20).map(mean_cost).collect();
    assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
    assert!(r.iter().all(|x| x[6] == x[7]));
}

#[test]
fn empty_sweep_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = beepcast(dir.path(), &["sweep", "--algo", "fk", "--family", "path:{5..4}"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "algo,n,e,L,M,m,predicted,simulated,rounds,adversary,seed\n");
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = beepcast(dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.contains(": PASS")).count(), 6);
}
