//! End-to-end runs of the `gdict` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gated_dict::metrics::{read_metrics_csv, METRICS_HEADER};
use gated_dict::sae::{load_checkpoint, Sae};

fn gdict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdict"))
        .args(args)
        .output()
        .expect("spawn gdict")
}

fn ok(args: &[&str]) -> Output {
    let out = gdict(args);
    assert!(
        out.status.success(),
        "gdict {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const TINY: &[&str] = &[
    "--d-act", "8", "--d-true", "16", "--d-feat", "12", "--batch-size", "64",
    "--total-steps", "60", "--warmup-steps", "5", "--eval-rows", "128", "--seed", "4",
];

#[test]
fn gen_data_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.gdac");
    let b = dir.path().join("b.gdac");
    for f in [&a, &b] {
        ok(&["gen-data", "--d-act", "8", "--d-true", "32", "--rows", "5000", "--seed", "7", "--out", p(f)]);
    }
    let (ba, bb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ba.len(), 20 + 5000 * 8 * 4);
    assert_eq!(ba, bb);
    let side = fs::read_to_string(dir.path().join("a.gdac.meta")).unwrap();
    assert!(side.contains("seed = 7"));
}

#[test]
fn gen_data_usage_and_config_errors() {
    let out = gdict(&["gen-data", "--d-act", "8", "--rows", "10", "--out", "/tmp/unused.gdac"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.gdac");
    let out = gdict(&["gen-data", "--d-act", "8", "--d-true", "4", "--rows", "10", "--out", p(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("must exceed"));
}

#[test]
fn train_is_deterministic_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<_> = ["r1", "r2"].iter().map(|r| dir.path().join(r)).collect();
    for r in &runs {
        let mut args = vec!["train", "--arch", "gated", "--lambda", "0.05", "--out", p(r)];
        args.extend_from_slice(TINY);
        ok(&args);
    }
    let a = fs::read(runs[0].join("final.gsae")).unwrap();
    let b = fs::read(runs[1].join("final.gsae")).unwrap();
    assert_eq!(a, b);
    let echoed = fs::read_to_string(runs[0].join("config.txt")).unwrap();
    assert!(echoed.contains("lambda = 0.05"));
    assert!(echoed.contains("d_feat = 12"));
    let metrics = fs::read_to_string(runs[0].join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().next().unwrap(), METRICS_HEADER);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# tiny run\nlambda = 0.5\nd_act = 8\nd_true = 16\nd_feat = 10\nbatch_size = 32\ntotal_steps = 20\neval_rows = 64\n").unwrap();
    let out = dir.path().join("o");
    ok(&["train", "--config", p(&cfg), "--lambda", "0.125", "--arch", "baseline", "--out", p(&out)]);
    let echoed = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(echoed.contains("lambda = 0.125"));
    assert!(echoed.contains("d_feat = 10"));
    let sae: Sae<f64> = load_checkpoint(out.join("final.gsae")).unwrap();
    assert_eq!(sae.w_dec().rows(), 10);
}

#[test]
fn no_rmag_ablation_keeps_rmag_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let mut args = vec!["train", "--arch", "gated", "--ablation", "no-rmag", "--out", p(&out)];
    args.extend_from_slice(TINY);
    ok(&args);
    let sae: Sae<f64> = load_checkpoint(out.join("final.gsae")).unwrap();
    assert!(sae.as_gated().unwrap().r_mag.iter().all(|&r| r == 0.0));
}

#[test]
fn periodic_checkpoints_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let mut args = vec!["train", "--arch", "baseline", "--checkpoint-every", "20", "--metrics-every", "20", "--out", p(&out)];
    args.extend_from_slice(TINY);
    ok(&args);
    for step in [20, 40, 60] {
        assert!(out.join(format!("checkpoint_{step:08}.gsae")).exists());
    }
    assert_eq!(read_metrics_csv(&out.join("metrics.csv")).unwrap().len(), 3);
}

#[test]
fn divergence_exits_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let mut args = vec!["train", "--arch", "baseline", "--lr", "1e300", "--out", p(&out)];
    args.extend_from_slice(TINY);
    let res = gdict(&args);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("step"));
}

fn trained(dir: &Path) -> std::path::PathBuf {
    let out = dir.join("model");
    let mut args = vec!["train", "--arch", "gated", "--out", p(&out)];
    args.extend_from_slice(TINY);
    ok(&args);
    out.join("final.gsae")
}

fn last_row(stdout: &[u8]) -> Vec<String> {
    let text = String::from_utf8_lossy(stdout);
    text.lines().last().unwrap().split(',').map(str::to_string).collect()
}

#[test]
fn eval_splices_and_missing_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ck = trained(dir.path());
    let common = ["--d-act", "8", "--d-true", "16", "--eval-rows", "256"];
    let mut id = vec!["eval", "--checkpoint", p(&ck), "--splice", "identity"];
    id.extend_from_slice(&common);
    assert_eq!(last_row(&ok(&id).stdout)[4], "1.0");
    let mut zero = vec!["eval", "--checkpoint", p(&ck), "--splice", "zero"];
    zero.extend_from_slice(&common);
    assert_eq!(last_row(&ok(&zero).stdout)[4], "0.0");
    let mut sae = vec!["eval", "--checkpoint", p(&ck)];
    sae.extend_from_slice(&common);
    let lr: f64 = last_row(&ok(&sae).stdout)[4].parse().unwrap();
    assert!(lr.is_finite());

    let missing = dir.path().join("nope.gsae");
    let out = gdict(&["eval", "--checkpoint", p(&missing)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ito_sorted_deduplicated_with_bias_row() {
    let dir = tempfile::tempdir().unwrap();
    let ck = trained(dir.path());
    let out = ok(&[
        "ito", "--checkpoint", p(&ck), "--target-k", "3,0,1,3", "--d-act", "8", "--d-true", "16",
        "--eval-rows", "128",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("target_k,{METRICS_HEADER}"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let ks: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(ks, vec!["0", "1", "3"]);
    assert_eq!(rows[0][3], "0.0");
    let mse: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(mse[1] <= mse[0] && mse[2] <= mse[1]);
}

#[test]
fn ito_oracle_guard_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wide");
    ok(&[
        "train", "--arch", "baseline", "--d-act", "8", "--d-true", "16", "--d-feat", "40",
        "--batch-size", "16", "--total-steps", "2", "--eval-rows", "16", "--out", p(&out),
    ]);
    let ck = out.join("final.gsae");
    let res = gdict(&[
        "ito", "--checkpoint", p(&ck), "--target-k", "20", "--oracle", "--d-act", "8",
        "--d-true", "16", "--eval-rows", "16",
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("exceeds"));
}

#[test]
fn sweep_compute_matches_and_writes_antichains() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw");
    let mut args = vec![
        "sweep", "--arch", "baseline,gated", "--lambdas", "0.05,0.5", "--out", p(&out),
    ];
    args.extend_from_slice(TINY);
    let res = Command::new(env!("CARGO_BIN_EXE_gdict"))
        .args(&args)
        .env("GDICT_THREADS", "2")
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for arch in ["baseline", "gated"] {
        let rows = read_metrics_csv(&out.join(format!("sweep_{arch}.csv"))).unwrap();
        let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda.unwrap()).collect();
        assert_eq!(lambdas, vec![0.05, 0.5]);
        let front = read_metrics_csv(&out.join(format!("pareto_{arch}.csv"))).unwrap();
        for a in &front {
            for b in &front {
                assert!(!a.dominates(b));
            }
        }
    }
    let base: Sae<f64> = load_checkpoint(out.join("baseline_lambda_5e-2").join("final.gsae"))
        .or_else(|_| load_checkpoint(out.join("baseline_lambda_5em2").join("final.gsae")))
        .unwrap();
    assert_eq!(base.w_dec().rows(), 18);
    let gated: Sae<f64> = load_checkpoint(out.join("gated_lambda_5em2").join("final.gsae")).unwrap();
    assert_eq!(gated.w_dec().rows(), 12);
}

#[test]
fn sweep_needs_two_lambdas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw");
    let res = gdict(&["sweep", "--lambdas", "0.1", "--out", p(&out)]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn train_from_activation_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("acts.gdac");
    ok(&["gen-data", "--d-act", "8", "--d-true", "16", "--rows", "2000", "--seed", "3", "--out", p(&data)]);
    let out = dir.path().join("o");
    ok(&[
        "train", "--arch", "gated", "--data", p(&data), "--d-feat", "12", "--batch-size", "64",
        "--total-steps", "40", "--eval-rows", "256", "--out", p(&out),
    ]);
    let rows = read_metrics_csv(&out.join("metrics.csv")).unwrap();
    // The sidecar lets the run score dictionary recovery.
    assert!(rows.last().unwrap().dict_recovery.is_some());
}

#[test]
fn demos_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["demo-toy1d", "--samples", "20000", "--out", p(dir.path())]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("JumpReLU"));
    let csv = fs::read_to_string(dir.path().join("toy1d.csv")).unwrap();
    assert!(csv.lines().nth(2).unwrap().ends_with(",0"));
    ok(&["demo-shrinkage", "--steps", "3000", "--lr", "1e-3", "--out", p(dir.path())]);
    assert!(dir.path().join("shrinkage.csv").exists());
}
