use std::fs;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qbasis");

fn qbasis(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn synth(dir: &std::path::Path, n_max: &str, name: &str) -> (Output, std::path::PathBuf) {
    let out = dir.join(name);
    let o = qbasis(&["synth", "--n-max", n_max, "--out", out.to_str().unwrap()]);
    (o, out)
}

#[test]
fn synth_small_table() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = synth(dir.path(), "2", "t2.txt");
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.split(' ').nth(2) == Some("N")).count(), 4);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t2.txt.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "synth");
    assert_eq!(manifest["config"]["n_max"], 2);
    assert_eq!(manifest["provenance"]["(0,0)"], "closed_form");
}

#[test]
fn synth_then_check_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, first) = synth(dir.path(), "9", "a.txt");
    let (b, second) = synth(dir.path(), "9", "b.txt");
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    let o = qbasis(&["check", first.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = String::from_utf8(o.stdout).unwrap();
    for suite in ["gram_off_diag", "gram_diagonal", "monotonicity", "minimax", "extremum_count"] {
        assert!(report.contains(suite));
    }

    let text = fs::read_to_string(&first).unwrap();
    let perturbed = text.replacen("7 3 3 t ", "7 3 3 t 0.01+", 1);
    assert_ne!(perturbed, text);
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, perturbed).unwrap();
    assert_eq!(qbasis(&["check", bad.to_str().unwrap()]).status.code(), Some(2));

    let line = text.lines().find(|l| l.starts_with("7 3 3 t ")).unwrap();
    let v: f64 = line[8..].parse().unwrap();
    fs::write(&bad, text.replace(line, &format!("7 3 3 t {}", v + 1e-2))).unwrap();
    let o = qbasis(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(7,3)"));
}

#[test]
fn usage_and_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.txt");
    assert_eq!(qbasis(&["synth", "--n-max", "-1", "--out", out.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(qbasis(&["synth", "--n-max", "4", "--damping", "2", "--out", out.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(qbasis(&["synth", "--n-max", "4", "--guess-order", "nope", "--out", out.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(qbasis(&["--help"]).status.code(), Some(0));
    assert_eq!(qbasis(&[]).status.code(), Some(1));

    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let o = qbasis(&["check", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn grid_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let (_, table) = synth(dir.path(), "7", "t7.txt");
    let table = table.to_str().unwrap();

    assert_eq!(qbasis(&["grid", table, "--indices", "1:1", "--resolution", "1"]).status.code(), Some(1));
    assert_ne!(qbasis(&["grid", table, "--indices", "9:1"]).status.code(), Some(0));

    let grid_path = dir.path().join("fig1.csv");
    let o = qbasis(&[
        "grid", table, "--indices", "1:1,3:1,5:1,7:1", "--resolution", "512", "--with-reduced", "--out",
        grid_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let grid = fs::read_to_string(grid_path).unwrap();
    assert_eq!(grid.lines().count(), 513);
    assert!(grid.starts_with("r,Q_1_1,Q_3_1,Q_5_1,Q_7_1,thetabar_1_1,"));

    let o = qbasis(&["grid", table, "--indices", "2:2,4:2,6:2", "--resolution", "3", "--with-zernike"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "r,Q_2_2,Q_4_2,Q_6_2,Z_2_2,Z_4_2,Z_6_2");
    assert!(text.lines().nth(3).unwrap().starts_with("1.00000000000,2.00000000000,"));

    let eval = |args: &[&str]| {
        let mut all = vec!["eval", table];
        all.extend_from_slice(args);
        let o = qbasis(&all);
        (o.status.code(), String::from_utf8(o.stdout).unwrap())
    };
    assert_eq!(eval(&["0", "0", "0.5"]), (Some(0), "1.41421356237\n".to_string()));
    assert_eq!(eval(&["2", "2", "1"]), (Some(0), "2.00000000000\n".to_string()));
    let (code, text) = eval(&["2", "2", "1", "0"]);
    assert_eq!(code, Some(0));
    let product: f64 = text.lines().nth(1).unwrap().parse().unwrap();
    assert!((product - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-11);
    assert_eq!(eval(&["2", "2", "1.5"]).0, Some(1));
    assert_eq!(eval(&["2", "2", "-0.5"]).0, Some(1));
    assert_eq!(eval(&["9", "1", "0.5"]).0, Some(1));
}
