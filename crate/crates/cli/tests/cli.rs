use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use temporal_rac::{BlochVector, TemporalStrategy};
use temporal_rac_cli::strategy_file::StrategyFile;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_temporal-rac"));
    c.env_remove("TEMPORAL_RAC_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("{key} missing in {out}"))
        .parse()
        .unwrap()
}

#[test]
fn classical_bound_n2() {
    let o = run(&["classical-bound", "--n", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("K_max 2.000000\n"));
    assert!(out.contains("F_max 0.750000\n"));
}

#[test]
fn classical_bound_large_n_reports_lower_bound() {
    let out = stdout(&run(&["classical-bound", "--n", "6"]));
    assert!(out.contains("F_max_lower_bound"));
}

#[test]
fn optimize_n3_seed7() {
    let o = run(&["optimize", "--n", "3", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("best_K 6.928203\n"));
}

#[test]
fn seed_env_var_is_default() {
    let flag = run(&["optimize", "--n", "3", "--seed", "11", "--restarts", "5"]);
    let env = bin()
        .args(["optimize", "--n", "3", "--restarts", "5"])
        .env("TEMPORAL_RAC_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
    assert!(stdout(&env).contains("seed 11\n"));
    assert!(stdout(&run(&["optimize", "--n", "2", "--restarts", "2"])).contains("seed 0\n"));

    let bad = bin()
        .args(["optimize", "--n", "2"])
        .env("TEMPORAL_RAC_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("TEMPORAL_RAC_SEED"));
}

#[test]
fn certify_n2_matches_line() {
    let o = run(&[
        "certify", "--n", "2", "--k-min", "2", "--k-max", "4", "--steps", "9",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("k,p_star,min_entropy,cell_i,cell_j,cell_a,cell_b")
    );
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line
            .split(',')
            .take(3)
            .map(|s| s.parse().unwrap())
            .collect();
        let expected = -(1.5 - f[0] / 4.0).log2();
        assert!((f[2] - expected).abs() < 1e-6, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 9);
    let err = stderr(&o);
    assert!(err.starts_with("n,alpha_fit,beta_fit,alpha_paper,beta_paper,max_residual\n"));
    assert!(err.contains("2,-0.250000,1.500000,-0.250000,1.500000,0.000000"));
}

#[test]
fn certify_fit_out_and_toggles() {
    let dir = tempfile::tempdir().unwrap();
    let fit = dir.path().join("fit.csv");
    let o = bin()
        .args([
            "certify", "--n", "2", "--k-min", "3", "--k-max", "4", "--steps", "3",
        ])
        .args(["--no-arrow-constraints", "--geq-k", "--fit-out"])
        .arg(&fit)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).is_empty());
    let text = std::fs::read_to_string(&fit).unwrap();
    assert!(text.starts_with("n,alpha_fit"));
    // without the arrow-of-time constraints the NS point certifies nothing
    assert!(stdout(&o)
        .lines()
        .last()
        .unwrap()
        .starts_with("4.000000,1.000000,0.000000"));
}

#[test]
fn certify_rejects_out_of_range() {
    let o = run(&[
        "certify", "--n", "2", "--k-min", "2", "--k-max", "5", "--steps", "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("--k-max 5"));

    let o = run(&[
        "certify", "--n", "2", "--k-min", "3", "--k-max", "2", "--steps", "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_flag_is_one_line_exit_1() {
    let o = run(&["optimize", "--n", "3", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("--frobnicate"));
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("certify"));
}

#[test]
fn evaluate_fixture() {
    let o = bin()
        .arg("evaluate")
        .arg(fixture("n2_optimal.toml"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((value(&out, "K") - 2.828427).abs() < 1e-12);
    assert!((value(&out, "F") - 0.853553).abs() < 1e-12);
    assert!(out.contains("A_1 0.707107 0.707107\n"));
    assert!(out.contains("A_2 0.707107 -0.707107\n"));
}

#[test]
fn evaluate_reports_bad_files() {
    let path = fixture("bad_axis.toml");
    let o = bin().arg("evaluate").arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad_axis.toml"));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.toml");
    std::fs::write(&broken, "n = 2\nalice = [[1.0, 0.0]]\n").unwrap();
    let o = bin().arg("evaluate").arg(&broken).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("broken.toml"));

    let o = bin()
        .arg("evaluate")
        .arg(dir.path().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn optimize_writes_files_that_evaluate_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let strategy = dir.path().join("best.toml");
    let restarts = dir.path().join("restarts.csv");
    let o = bin()
        .args([
            "optimize",
            "--n",
            "3",
            "--seed",
            "3",
            "--restarts",
            "10",
            "--strategy-out",
        ])
        .arg(&strategy)
        .arg("--restarts-out")
        .arg(&restarts)
        .output()
        .unwrap();
    assert!(o.status.success());
    let best = value(&stdout(&o), "best_K");
    let eval = stdout(&bin().arg("evaluate").arg(&strategy).output().unwrap());
    assert_eq!(value(&eval, "K"), best);
    let csv = std::fs::read_to_string(&restarts).unwrap();
    assert!(csv.starts_with("restart,k,sweeps,converged\n"));
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn strategy_file_round_trip_is_exact() {
    let awkward = [
        0.1,
        1.0 / 3.0,
        -0.0,
        5e-324,
        1.0 / 3.0f64.sqrt(),
        -2.0f64.sqrt() / 2.0,
    ];
    let file = StrategyFile {
        n: 2,
        input_state: [awkward[0], awkward[1], awkward[2]],
        alice: vec![[awkward[3], awkward[4], awkward[5]], [1.0, 0.0, 0.0]],
        bob: vec![
            [awkward[5], awkward[1], awkward[0]],
            [f64::MIN_POSITIVE, 1e300, -1e-300],
        ],
    };
    let back = StrategyFile::parse(&file.to_toml()).unwrap();
    assert_eq!(back, file);
    for (a, b) in back.input_state.iter().zip(&file.input_state) {
        assert_eq!(a.to_bits(), b.to_bits());
    }

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let strategy = TemporalStrategy::with_input_state(
        2,
        vec![BlochVector::new(h, 0.0, h), BlochVector::new(h, 0.0, -h)],
        vec![BlochVector::X, BlochVector::Z],
        BlochVector::new(0.1, 0.2, 0.3),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    StrategyFile::from_strategy(&strategy).write(&path).unwrap();
    let read = StrategyFile::read(&path).unwrap().to_strategy().unwrap();
    assert_eq!(read, strategy);
}

#[test]
fn strategy_file_rejects_wrong_shapes() {
    let text = "n = 3\ninput_state = [0.0, 0.0, 0.0]\nalice = [[1.0, 0.0, 0.0]]\nbob = [[1.0, 0.0, 0.0]]\n";
    let parsed = StrategyFile::parse(text).unwrap();
    assert!(parsed.to_strategy().is_err());
    assert!(StrategyFile::parse("n = 2\nextra = 1\n").is_err());
    let state = "n = 2\ninput_state = [1.0, 1.0, 0.0]\nalice = [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]\nbob = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]\n";
    assert!(StrategyFile::parse(state).unwrap().to_strategy().is_err());
}

#[test]
fn audit_text_and_csv() {
    let text = stdout(&run(&["audit", "--n", "3"]));
    assert!(text.contains("classical_K_max"));
    assert!(text.contains("consistent"));
    let csv = stdout(&run(&["audit", "--n", "3", "--csv"]));
    assert!(csv.starts_with("quantity,paper_value,computed_value,delta,flag\n"));
    assert!(csv.contains("classical_K_max,4.000000,6.000000,2.000000,discrepancy"));
    assert_eq!(run(&["audit", "--n", "1"]).status.code(), Some(1));
}

#[test]
fn plot_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = run(&[
        "certify", "--n", "2", "--k-min", "2", "--k-max", "4", "--steps", "5",
    ]);
    std::fs::write(&csv, &o.stdout).unwrap();
    let svg_a = dir.path().join("a.svg");
    let svg_b = dir.path().join("b.svg");
    for svg in [&svg_a, &svg_b] {
        let o = bin()
            .arg("plot")
            .arg(&csv)
            .arg("--out")
            .arg(svg)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(&svg_a).unwrap();
    assert_eq!(a, std::fs::read(&svg_b).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains(r#"viewBox="0 0 800 600""#));
    assert!(text.contains("min_entropy"));
}

#[test]
fn plot_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "k,min_entropy\n1,0\n1,1\n").unwrap();
    let out = dir.path().join("o.svg");
    let o = bin()
        .arg("plot")
        .arg(&csv)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("strictly increasing"));

    std::fs::write(&csv, "k,p\n1,0\n").unwrap();
    let o = bin()
        .arg("plot")
        .arg(&csv)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("min_entropy"));

    std::fs::write(&csv, "k,min_entropy\n1,x\n").unwrap();
    let o = bin()
        .arg("plot")
        .arg(&csv)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(stderr(&o).contains("row 2"));
}

#[test]
fn commands_are_idempotent() {
    for args in [
        &["classical-bound", "--n", "3"][..],
        &["audit", "--n", "2"][..],
        &[
            "certify", "--n", "2", "--k-min", "2.5", "--k-max", "3.5", "--steps", "4",
        ][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.stderr, b.stderr);
    }
}

#[test]
fn run_with_captures_output() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = temporal_rac_cli::run_with(
        ["temporal-rac", "classical-bound", "--n", "3"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    assert!(String::from_utf8(out).unwrap().contains("K_max 6.000000"));
}
