use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn canon() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/canon2d.txt")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardchoice"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

#[test]
fn classify_csv_matrix() {
    let out = ok(&["--format", "csv", "classify", canon().to_str().unwrap()]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], ",A,B,A+,B+");
    assert_eq!(
        lines[1],
        "A,equal,incommensurable,preferred_second,incommensurable"
    );
    assert_eq!(
        lines[3],
        "A+,preferred_first,incommensurable,equal,incommensurable"
    );
}

#[test]
fn front_lists_witnesses() {
    let out = ok(&["front", canon().to_str().unwrap()]);
    assert!(out.starts_with("front: A+, B+\n"));
    assert!(out.contains("A dominated by A+"));
    assert!(out.contains("B dominated by B+"));
}

#[test]
fn sift_confirms_and_breaks() {
    let f = canon();
    let f = f.to_str().unwrap();
    let out = ok(&[
        "--format", "csv", "sift", f, "--pair", "A", "B", "--delta", "0.01",
    ]);
    assert_eq!(out.lines().nth(1), Some("A,B,0.01,confirmed,"));
    let out = ok(&["sift", f, "--pair", "A", "B", "--delta", "0.4"]);
    assert!(out.contains("not confirmed"));
    // the scenario's own delta is the default
    assert!(ok(&["sift", f, "--pair", "A", "B"]).contains("at delta 0.01: confirmed"));
}

#[test]
fn resolve_transform_moves_beta() {
    let f = canon();
    let out = ok(&[
        "--format",
        "csv",
        "resolve",
        f.to_str().unwrap(),
        "--pair",
        "A",
        "B",
        "--target",
        "first",
        "--method",
        "transform",
    ]);
    let beta = out.lines().find(|l| l.starts_with("beta,")).unwrap();
    let fields: Vec<&str> = beta.split(',').collect();
    assert_eq!(fields[1], "SecondBetter");
    let w: Vec<f64> = fields[4].split(';').map(|x| x.parse().unwrap()).collect();
    assert!((w[0] - 0.5).abs() < 1e-9 && (w[1] - 0.5).abs() < 1e-9);
    let dist: f64 = fields[3].parse().unwrap();
    assert!((dist - 0.08f64.sqrt()).abs() < 1e-8);
}

#[test]
fn resolve_abandon_removes_opponent() {
    let out = ok(&[
        "resolve",
        canon().to_str().unwrap(),
        "--pair",
        "A",
        "B",
        "--target",
        "second",
        "--method",
        "abandon",
    ]);
    assert!(out.contains("after: preferred_second"));
    assert!(out.contains("removed: alpha"));
}

#[test]
fn resolve_arbitrary_is_seeded() {
    let f = canon();
    let f = f.to_str().unwrap();
    let a = ok(&[
        "resolve",
        f,
        "--pair",
        "A",
        "B",
        "--method",
        "arbitrary",
        "--seed",
        "9",
    ]);
    let b = ok(&[
        "resolve",
        f,
        "--pair",
        "B",
        "A",
        "--method",
        "arbitrary",
        "--seed",
        "9",
    ]);
    let chosen = |s: &str| s.lines().find(|l| l.starts_with("chosen:")).unwrap().to_string();
    assert_eq!(chosen(&a), chosen(&b));
}

#[test]
fn transform_without_target_is_a_domain_error() {
    let o = run(&[
        "resolve",
        canon().to_str().unwrap(),
        "--pair",
        "A",
        "B",
        "--method",
        "transform",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let f = canon();
    let f = f.to_str().unwrap();
    assert_eq!(run(&["sift", f, "--pair", "A", "Z"]).status.code(), Some(1));
    assert_eq!(
        run(&["resolve", f, "--pair", "A", "A+", "--target", "first", "--method", "abandon"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["classify", "/nonexistent/file"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["sift", f, "--pair", "A"]).status.code(), Some(2));
    assert_eq!(run(&["--format", "xml", "classify", f]).status.code(), Some(2));
}

#[test]
fn syntax_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.txt");
    fs::write(&p, "").unwrap();
    let o = run(&["classify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:1"));
}

#[test]
fn demos() {
    assert!(ok(&["demo", "holocaust-cake"]).contains("disagreement: true"));
    assert!(ok(&["demo", "equality"]).contains("indistinguishable: true"));
    assert_eq!(
        ok(&["--format", "csv", "demo", "impossibility"]),
        "result,grid,w1\nimpossible,10000,\n"
    );
    assert!(ok(&["demo", "weakness"]).contains("metapolicy equal mislabels: (X,X')"));
}

#[test]
fn gen_train_pipeline_round() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gen.txt");
    fs::write(
        &cfg,
        "[generator]\noptions: 4\njurors: 3\nhard: 0.3\neasy: 0.6\nequal: 0.1\nseparable: 1\ncount: 200\n",
    )
    .unwrap();
    let corpus = dir.path().join("corpus");
    let again = dir.path().join("again");
    let c = corpus.to_str().unwrap();
    ok(&[
        "gen",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        c,
    ]);
    ok(&[
        "gen",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        again.to_str().unwrap(),
    ]);
    let mut names: Vec<_> = fs::read_dir(&corpus)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 200);
    for n in &names {
        assert_eq!(
            fs::read(corpus.join(n)).unwrap(),
            fs::read(again.join(n)).unwrap()
        );
    }

    let model = dir.path().join("gate1.txt");
    let out = ok(&[
        "--format",
        "csv",
        "train-gate1",
        "--corpus",
        c,
        "--out",
        model.to_str().unwrap(),
    ]);
    let row: Vec<f64> = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(row[0] + row[1], 200.0);
    assert!(row[3] >= 0.95, "held-out accuracy {}", row[3]);

    let out = ok(&[
        "pipeline",
        canon().to_str().unwrap(),
        "--gate1",
        model.to_str().unwrap(),
    ]);
    assert!(out.contains("route: pareto"));
    assert!(out.contains("front: A+, B+"));
    let out = ok(&[
        "pipeline",
        canon().to_str().unwrap(),
        "--gate1",
        model.to_str().unwrap(),
        "--tau",
        "0.01",
    ]);
    assert!(out.contains("route: scalarised"));
}

#[test]
fn report_writes_plot() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("canon.svg");
    let out = ok(&[
        "report",
        canon().to_str().unwrap(),
        "--plot",
        svg.to_str().unwrap(),
        "--resolve",
        "first",
    ]);
    assert!(out.contains("scalarised incommensurable verdicts: 0"));
    assert!(out.contains("plot of A/B"));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("class=\"panel\"").count(), 2);
    let csv = ok(&["--format", "csv", "report", canon().to_str().unwrap()]);
    assert_eq!(csv.lines().count(), 7);
}
