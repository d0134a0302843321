//! End-to-end checks of the command-line surface: exit codes, file outputs,
//! determinism, and the synth → mine round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn prototax(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prototax"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &Path) -> std::path::PathBuf {
    let spec = dir.join("tree.json");
    fs::write(
        &spec,
        r#"{"billing":{"payment":["pay","invoice","charge"],"cancel":["stop","quit","end"]},
            "account":{"login":["signin","enter","access"],"remove":["delete","erase","purge"]},
            "music":{"play":["song","tune","track"],"volume":["loud","quiet","mute"]}}"#,
    )
    .unwrap();
    spec
}

#[test]
fn synth_then_mine_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path());
    let out = prototax(
        &[
            "synth",
            "--spec",
            "tree.json",
            "--examples-per-intent",
            "5",
            "--noise",
            "0.1",
            "--seed",
            "7",
            "--out",
            "workspace.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("workspace.json").exists());
    assert!(dir.path().join("workspace.json.config.txt").exists());

    let mined = prototax(
        &[
            "mine",
            "--input",
            "workspace.json",
            "--out",
            "report.json",
        ],
        dir.path(),
    );
    assert!(mined.status.success());
    let stdout = String::from_utf8_lossy(&mined.stdout);
    assert!(stdout.contains("separator: underscore"), "{stdout}");
    assert!(stdout.contains("taxonomy rate: 1.0000"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["separator"], "underscore");
}

#[test]
fn synth_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path());
    for name in ["a.json", "b.json"] {
        let out = prototax(
            &[
                "synth", "--spec", "tree.json", "--seed", "42", "--out", name,
            ],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    let b = fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn synth_rejects_invalid_spec_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"a": {"b": []}}"#).unwrap();
    let out = prototax(
        &["synth", "--spec", "bad.json", "--out", "w.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mine_missing_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = prototax(
        &["mine", "--input", "nope.json", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mine_unmineable_workspace_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("flat.json"),
        r#"{"name":"flat","language":"en","intents":[
            {"intent":"greeting","examples":["hi","hello"]},
            {"intent":"thanks","examples":["thank you","thanks"]}
        ]}"#,
    )
    .unwrap();
    let out = prototax(
        &["mine", "--input", "flat.json", "--out", "r.json"],
        dir.path(),
    );
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("separator: none"), "{stdout}");
    assert!(stdout.contains("taxonomy rate: 0.0000"), "{stdout}");
}

fn eval_config(dir: &Path) -> std::path::PathBuf {
    // small model sizes keep the CLI tests quick
    let config = dir.join("eval.conf");
    fs::write(
        &config,
        "hidden=16\nepochs=6\nm=16\nwalk-length=6\nwalks-per-node=3\ndeepwalk-epochs=2\n\
         cdssm-buckets=128\ncdssm-conv-dim=16\nencoder-buckets=256\nencoder-dim=48\n",
    )
    .unwrap();
    config
}

#[test]
fn eval_writes_results_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path());
    assert!(prototax(
        &["synth", "--spec", "tree.json", "--examples-per-intent", "8", "--seed", "3", "--out", "w.json"],
        dir.path()
    )
    .status
    .success());
    eval_config(dir.path());
    for out_dir in ["run1", "run2"] {
        let out = prototax(
            &[
                "eval",
                "--input",
                "w.json",
                "--methods",
                "BASE,S",
                "--removed",
                "2",
                "--samplings",
                "2",
                "--seed",
                "11",
                "--config",
                "eval.conf",
                "--out",
                out_dir,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv1 = fs::read(dir.path().join("run1/results.csv")).unwrap();
    let csv2 = fs::read(dir.path().join("run2/results.csv")).unwrap();
    assert_eq!(csv1, csv2, "same invocation must produce identical CSVs");
    assert!(dir.path().join("run1/resolved_config.txt").exists());
    let text = String::from_utf8(csv1).unwrap();
    // header + 2 methods * 2 samplings
    assert_eq!(text.lines().count(), 5, "{text}");
    assert!(dir.path().join("run1/sweeps").read_dir().unwrap().count() == 4);
}

#[test]
fn eval_jobs_parallelism_matches_serial_output() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path());
    assert!(prototax(
        &["synth", "--spec", "tree.json", "--examples-per-intent", "8", "--seed", "3", "--out", "w.json"],
        dir.path()
    )
    .status
    .success());
    eval_config(dir.path());
    for (out_dir, jobs) in [("serial", "1"), ("parallel", "3")] {
        let out = prototax(
            &[
                "eval", "--input", "w.json", "--methods", "BASE", "--removed", "1",
                "--samplings", "3", "--seed", "5", "--config", "eval.conf",
                "--jobs", jobs, "--out", out_dir,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        fs::read(dir.path().join("serial/results.csv")).unwrap(),
        fs::read(dir.path().join("parallel/results.csv")).unwrap()
    );
}

#[test]
fn eval_on_unmineable_workspace_records_skips_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("flat.json"),
        r#"{"name":"flat","language":"en","intents":[
            {"intent":"greeting","examples":["hi","hello","hey","yo"]},
            {"intent":"thanks","examples":["thank you","thanks","ty","cheers"]},
            {"intent":"goodbye","examples":["bye","goodbye","see ya","later"]}
        ]}"#,
    )
    .unwrap();
    eval_config(dir.path());
    let out = prototax(
        &[
            "eval", "--input", "flat.json", "--methods", "BASE,T", "--removed", "1",
            "--samplings", "2", "--seed", "1", "--config", "eval.conf", "--out", "res",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("res/results.csv")).unwrap();
    let skipped: Vec<&str> = text.lines().filter(|l| l.contains("skipped")).collect();
    assert_eq!(skipped.len(), 2, "{text}");
    assert!(skipped.iter().all(|l| l.contains(",T,")), "{text}");
}

#[test]
fn compare_buckets_hand_built_results() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("res");
    fs::create_dir_all(&res).unwrap();
    // two workspaces: one 15% better with T, one identical
    fs::write(
        res.join("results.csv"),
        "workspace,method,seed,status,far,frr,iser,eer_crossing,total_error_at_eer,theta_star\n\
         w1,BASE,0,ok,0.2,0.2,0.1,0.2,0.20,0.5\n\
         w1,T,0,ok,0.2,0.2,0.1,0.2,0.17,0.5\n\
         w2,BASE,0,ok,0.2,0.2,0.1,0.2,0.20,0.5\n\
         w2,T,0,ok,0.2,0.2,0.1,0.2,0.20,0.5\n",
    )
    .unwrap();
    let out = prototax(
        &[
            "compare",
            "--results",
            "res",
            "--metric",
            "eer",
            "--out",
            "buckets.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("buckets.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], "range,T,best");
    // w1: +15% -> [10, 20); w2: 0% -> [-5, 5)
    assert_eq!(lines[2], "\"-5% <= imp < 5%\",50.0,50.0");
    assert_eq!(lines[4], "\"10% <= imp < 20%\",50.0,50.0");
}

#[test]
fn compare_without_base_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("res");
    fs::create_dir_all(&res).unwrap();
    fs::write(
        res.join("results.csv"),
        "workspace,method,seed,status,far,frr,iser,eer_crossing,total_error_at_eer,theta_star\n\
         w1,T,0,ok,0.2,0.2,0.1,0.2,0.17,0.5\n",
    )
    .unwrap();
    let out = prototax(
        &["compare", "--results", "res", "--out", "b.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_malformed_csv_exits_2_with_row() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("res");
    fs::create_dir_all(&res).unwrap();
    fs::write(
        res.join("results.csv"),
        "workspace,method,seed,status,far,frr,iser,eer_crossing,total_error_at_eer,theta_star\n\
         w1,BASE,zzz,ok,0.2,0.2,0.1,0.2,0.2,0.5\n",
    )
    .unwrap();
    let out = prototax(
        &["compare", "--results", "res", "--out", "b.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 2"), "{stderr}");
}

#[test]
fn unknown_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = prototax(&["mine", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
