use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gcpso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcpso"))
        .args(args)
        .env_remove("GCPSO_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = gcpso(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn err(args: &[&str]) -> String {
    let out = gcpso(args);
    assert_eq!(out.status.code(), Some(1), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_csvs_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = |dir: &Path| {
        ["run", "--objective", "rastrigin", "--dim", "5", "--iters", "50", "--seed", "4", "--output"]
            .iter()
            .map(|x| x.to_string())
            .chain([s(dir).to_string()])
            .collect::<Vec<_>>()
    };
    let first = args(&a);
    let stdout = ok(&first.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(stdout.contains("final best value"));
    ok(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    for f in ["trials.csv", "finals.csv", "summary.csv", "curves.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let trials = fs::read_to_string(a.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().next(), Some("algorithm,objective,trial,iteration,gbest_value"));
    assert_eq!(trials.lines().count(), 1 + 51);

    let again = err(&first.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(again.contains("--force"), "{again}");
}

#[test]
fn invalid_epsilon_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let e = err(&["run", "--epsilon", "1.5", "--iters", "5", "--output", s(tmp.path())]);
    assert!(e.starts_with("error:") && e.contains("epsilon") && e.contains("[0,1]"), "{e}");
}

#[test]
fn sweep_variants() {
    let tmp = tempfile::tempdir().unwrap();
    let common = ["--objective", "sphere,ackley", "--dim", "3", "--iters", "20", "--trials", "3"];

    let only_zero = tmp.path().join("zero");
    let mut args = vec!["sweep-epsilon", "--epsilons", "0", "--output", s(&only_zero)];
    args.extend(common);
    ok(&args);
    let wide = fs::read_to_string(only_zero.join("sweep.csv")).unwrap();
    assert_eq!(wide.lines().next(), Some("objective,eps=0"));
    assert_eq!(fs::read_to_string(only_zero.join("sweep_comparison.csv")).unwrap().lines().count(), 1);

    let several = tmp.path().join("several");
    let mut args = vec!["sweep-epsilon", "--epsilons", "0,0.1,0.3,1.0", "--output", s(&several)];
    args.extend(common);
    ok(&args);
    let wide = fs::read_to_string(several.join("sweep.csv")).unwrap();
    assert_eq!(wide.lines().next(), Some("objective,eps=0,eps=0.1,eps=0.3,eps=1"));
    assert_eq!(wide.lines().count(), 3);
    assert_eq!(fs::read_to_string(several.join("sweep_comparison.csv")).unwrap().lines().count(), 1 + 3 * 2);

    let dup = tmp.path().join("dup");
    let mut args = vec!["sweep-epsilon", "--epsilons", "0.2,0.2", "--output", s(&dup)];
    args.extend(common);
    let out = gcpso(&args);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("duplicate epsilon 0.2"), "{stderr}");
    assert!(stderr.contains("epsilon 0 added"), "{stderr}");
}

#[test]
fn cml_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("field.csv");
    let out = ok(&["cml", "--size", "8", "--steps", "40", "--epsilon", "0", "--output", s(&path)]);
    assert!(out.contains("min cell value") && out.contains("max cell value"));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,c0,c1,c2,c3,c4,c5,c6,c7"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 41);
    // decoupled: every column follows the logistic map (exact up to the printed precision)
    for w in rows.windows(2) {
        for (x, y) in w[0].iter().zip(&w[1]) {
            assert!((4.0 * x * (1.0 - x) - y).abs() < 1e-12);
        }
    }
    assert!(rows.iter().flatten().all(|v| (0.0..=1.0).contains(v)));

    let hom = tmp.path().join("hom.csv");
    ok(&["cml", "--topology", "diffusive", "--size", "5", "--steps", "10", "--homogeneous", "0.3",
        "--output", s(&hom)]);
    for line in fs::read_to_string(&hom).unwrap().lines().skip(1) {
        let cells: Vec<&str> = line.split(',').skip(1).collect();
        assert!(cells.iter().all(|c| *c == cells[0]), "{line}");
    }

    let e = err(&["cml", "--topology", "ring", "--output", s(&tmp.path().join("x.csv"))]);
    assert!(e.contains("diffusive") && e.contains("global") && e.contains("accumulated"), "{e}");
    let e = err(&["cml", "--topology", "diffusive", "--size", "2", "--output", s(&tmp.path().join("y.csv"))]);
    assert!(e.starts_with("error:"), "{e}");
}

#[test]
fn init_config_round_trips_and_is_protected() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("exp.toml");
    ok(&["init-config", "--preset", "desk", "--output", s(&path)]);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("trials = 11"));
    assert!(err(&["init-config", "--output", s(&path)]).contains("--force"));
    ok(&["init-config", "--output", s(&path), "--force"]);
    assert!(fs::read_to_string(&path).unwrap().contains("trials = 51"));

    // a trimmed copy drives an experiment; flags override the file
    let small = tmp.path().join("small.toml");
    fs::write(
        &small,
        "trials = 2\npopulation = 6\nbudget = { iterations = 10 }\n\
         [[algorithms]]\nname = \"pso\"\n[[algorithms]]\nname = \"gcpso\"\n\
         [[objectives]]\nname = \"sphere\"\ndimension = 2\n",
    )
    .unwrap();
    let outdir = tmp.path().join("out");
    ok(&["experiment", "--config", s(&small), "--trials", "3", "--output", s(&outdir)]);
    let finals = fs::read_to_string(outdir.join("finals.csv")).unwrap();
    assert_eq!(finals.lines().count(), 1 + 2 * 3);

    fs::write(&small, "trials = 2\nbogus = 1\n").unwrap();
    assert!(err(&["experiment", "--config", s(&small)]).contains("bogus"));
}

#[test]
fn output_dir_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_gcpso"))
        .args(["run", "--dim", "2", "--iters", "5"])
        .env("GCPSO_OUTPUT_DIR", tmp.path().join("env"))
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(tmp.path().join("env/summary.csv").exists());
}

#[test]
fn comparing_an_algorithm_with_itself_ties() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("exp");
    ok(&["experiment", "--algorithm", "pso,gcpso", "--objective", "sphere,griewank,schwefel", "--dim", "3",
        "--iters", "20", "--trials", "3", "--output", s(&dir)]);
    let summary = dir.join("summary.json");
    let table = tmp.path().join("cmp.csv");
    let out = ok(&["compare", "--summary", s(&summary), "--baseline", "pso", "--challenger", "pso",
        "--output", s(&table)]);
    assert!(out.contains("0 wins, 0 losses, 3 ties"), "{out}");
    let rows = fs::read_to_string(&table).unwrap();
    assert_eq!(rows.lines().skip(1).filter(|l| l.ends_with(",tie")).count(), 3);
    assert!(err(&["compare", "--summary", s(&summary), "--challenger", "fips"]).contains("fips"));
}

#[test]
fn list_objectives_names_the_catalog() {
    let out = ok(&["list-objectives"]);
    for name in ["sphere", "ackley", "rastrigin", "rosenbrock", "griewank", "dejong_f4", "schwefel"] {
        assert!(out.contains(name));
    }
}
