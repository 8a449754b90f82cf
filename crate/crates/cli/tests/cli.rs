use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn tca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tca")).args(args).output().expect("failed to run tca")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_sample() {
    let out = tca(&["validate", path(&data("sample.tca"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "ok\n");
}

#[test]
fn validate_reports_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let sample = fs::read_to_string(data("sample.tca")).unwrap();

    let no_p2 = dir.path().join("cond3.tca");
    fs::write(&no_p2, sample.replace(r#""members":["p1","p2","p3"]"#, r#""members":["p1","p3"]"#)).unwrap();
    let out = tca(&["validate", path(&no_p2)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "COND3 edge=1\n");

    let no_p3 = dir.path().join("cond2.tca");
    fs::write(&no_p3, sample.replace(r#""members":["p1","p3","p4"]"#, r#""members":["p1","p4"]"#)).unwrap();
    let out = tca(&["validate", path(&no_p3)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "COND2 channel=c2 between=p1,p4\nCOND3 edge=3\n");

    let lonely = dir.path().join("cond1.tca");
    fs::write(&lonely, sample.replace(r#""members":["p3","p5"]"#, r#""members":["p5"]"#)).unwrap();
    let out = tca(&["validate", path(&lonely)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "COND1 channel=c3 members=1\nCOND3 edge=4\n");
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let sample = fs::read_to_string(data("sample.tca")).unwrap();
    let truncated = dir.path().join("truncated.tca");
    fs::write(&truncated, &sample[..sample.len() / 2]).unwrap();
    let out = tca(&["validate", path(&truncated)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line "));

    assert_eq!(tca(&["validate", "/nonexistent.tca"]).status.code(), Some(2));
    assert_eq!(tca(&["apply", path(&data("sample.tca")), "c1 jump 2"]).status.code(), Some(2));
}

#[test]
fn apply_matches_golden_files() {
    let out = tca(&["apply", path(&data("sample.tca")), "c1 disc 2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), fs::read_to_string(data("sample_left.tca")).unwrap());

    let out = tca(&["apply", path(&data("sample.tca")), "c1 conn 1 c2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), fs::read_to_string(data("sample_joined.tca")).unwrap());
}

#[test]
fn apply_stops_at_invalid_action() {
    let out = tca(&["apply", path(&data("sample.tca")), "c1 swap 1", "c3 swap 4"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("INVALID step=1 action=\"c3 swap 4\""), "{text}");
}

#[test]
fn plan_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    for (from, to) in
        [("sample.tca", "sample.tca"), ("sample.tca", "sample_joined.tca"), ("sample_left.tca", "sample_joined.tca")]
    {
        let out = tca(&["plan", path(&data(from)), path(&data(to))]);
        assert_eq!(out.status.code(), Some(0));
        let word = dir.path().join("plan.word");
        fs::write(&word, &out.stdout).unwrap();
        let out = tca(&["replay", path(&data(from)), path(&word)]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(stdout(&out), fs::read_to_string(data(to)).unwrap());
    }
}

#[test]
fn diamond_counterexample() {
    let out = tca(&["check-diamond", path(&data("one_order.rldfa"))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        stdout(&out),
        "COUNTEREXAMPLE state=s0 initial=true a1=\"c1 nop\" a2=\"c2 nop\" a1a2=s2 a2a1=undefined\n"
    );
    let dir = tempfile::tempdir().unwrap();
    let words = dir.path().join("w.word");
    fs::write(&words, "{\"format-version\":1,\"kind\":\"word\",\"processes\":[\"p1\",\"p2\",\"p3\",\"p4\"],\"channels\":[\"c1\",\"c2\",\"c3\"]}\n").unwrap();
    let out = tca(&["compare", path(&data("one_order.rldfa")), path(&words)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("COUNTEREXAMPLE"));
}

#[test]
fn generated_parity_compares_green() {
    let dir = tempfile::tempdir().unwrap();
    let dfa = dir.path().join("d.rldfa");
    let words = dir.path().join("w.word");
    let report = dir.path().join("r.report");
    for seed in ["3", "4", "7"] {
        let out = tca(&["gen", "dfa", "--n", "3", "--k", "2", "--seed", seed, "--family", "parity"]);
        assert_eq!(out.status.code(), Some(0));
        fs::write(&dfa, &out.stdout).unwrap();
        assert_eq!(tca(&["check-diamond", path(&dfa)]).status.code(), Some(0));
        let out = tca(&["gen", "words", path(&dfa), "--seed", seed, "--max-len", "6", "--count", "40"]);
        fs::write(&words, &out.stdout).unwrap();
        let out = tca(&["compare", path(&dfa), path(&words), "--report", path(&report)]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        let text = stdout(&out);
        assert!(text.lines().all(|l| l.starts_with("PASS word=")), "{text}");
        let report = fs::read_to_string(&report).unwrap();
        assert!(report.starts_with("{\"format-version\":1,\"kind\":\"report\""));
        let summaries = report.lines().filter(|l| l.contains("\"length\"")).count();
        assert_eq!(summaries, text.lines().count());

        let out = tca(&["run", path(&dfa), path(&words)]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(stdout(&out).lines().count(), text.lines().count());
    }
}

#[test]
fn outputs_are_deterministic() {
    let runs: Vec<Output> = (0..2)
        .map(|_| tca(&["suite", "--n", "3", "--k", "2", "--count", "4", "--words", "20", "--seed", "11"]))
        .collect();
    assert_eq!(runs[0].status.code(), Some(0));
    assert_eq!(runs[0].stdout, runs[1].stdout);
    let a = tca(&["gen", "dfa", "--n", "4", "--k", "3", "--seed", "5", "--family", "tracker"]);
    let b = tca(&["gen", "dfa", "--n", "4", "--k", "3", "--seed", "5", "--family", "tracker"]);
    assert_eq!(a.stdout, b.stdout);
    let c = tca(&["gen", "tca", "--n", "6", "--k", "4", "--seed", "9"]);
    assert_eq!(c.stdout, tca(&["gen", "tca", "--n", "6", "--k", "4", "--seed", "9"]).stdout);
    assert_ne!(c.stdout, tca(&["gen", "tca", "--n", "6", "--k", "4", "--seed", "10"]).stdout);
}
