use std::process::{Command, Output};

fn kgnf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgnf")).args(args).output().expect("spawn kgnf")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_preset_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.csv");
    let o = kgnf(&["simulate", "zero-g", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("J_15_drift"));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("step,time,H,Hh,norm_h12,norm_h1,J_0,"));
    let again = dir.path().join("again.csv");
    kgnf(&["simulate", "zero-g", "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "K = 8\ncolour = red\n").unwrap();
    assert_eq!(kgnf(&["simulate", bad.to_str().unwrap()]).status.code(), Some(2));

    let cfl = dir.path().join("cfl.cfg");
    std::fs::write(&cfl, "K = 8\nh = 1\nstrict = true\n").unwrap();
    assert_eq!(kgnf(&["simulate", cfl.to_str().unwrap()]).status.code(), Some(2));

    let missing = dir.path().join("missing.cfg");
    assert_eq!(kgnf(&["simulate", missing.to_str().unwrap()]).status.code(), Some(4));

    let unwritable = dir.path().join("no/such/dir/out.csv");
    let o = kgnf(&["simulate", "zero-g", "--out", unwritable.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let blow = dir.path().join("blow.cfg");
    std::fs::write(&blow, "K = 8\ng = monomial:3:-1\neps = 200\nh = 0.1\nT = 50\ns0 = 0\n").unwrap();
    assert_eq!(kgnf(&["simulate", blow.to_str().unwrap()]).status.code(), Some(3));

    assert_eq!(kgnf(&["scaling", "bea-toy", "--quantity", "nope", "--eps", "0.1,0.05,0.025"]).status.code(), Some(2));
    assert_eq!(kgnf(&["scaling", "bea-toy", "--quantity", "bea_defect_lie", "--eps", "0.1,0.05"]).status.code(), Some(2));
}

#[test]
fn scaling_prints_table_and_exponent() {
    let o = kgnf(&["scaling", "bea-toy", "--quantity", "bea_defect_lie", "--eps", "0.1,0.05,0.025"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("eps,value,usable\n"));
    let e: f64 = out
        .lines()
        .last()
        .unwrap()
        .split_whitespace()
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((e - 4.0).abs() < 0.7, "{out}");
}

#[test]
fn normal_form_commands() {
    let dir = tempfile::tempdir().unwrap();
    let bea = dir.path().join("bea.txt");
    let o = kgnf(&["bea", "bea-toy", "--r", "2", "--out", bea.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let sol = kgnf_core::normalform::read_solution(&std::fs::read_to_string(&bea).unwrap()).unwrap();
    assert_eq!(sol.r, 2);

    let o = kgnf(&["bnf", "bnf-toy", "--gamma", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let out = kgnf_core::normalform::read_birkhoff(&stdout(&o)).unwrap();
    assert_eq!(out.gamma, 0.05);
    assert_eq!(out.q.len(), 2);
    assert_eq!(kgnf(&["bnf", "bnf-toy", "--gamma", "1.5"]).status.code(), Some(2));

    let o = kgnf(&["divisors", "bnf-toy", "--r", "1", "--k", "-2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("min |Omega| "));
    assert_eq!(kgnf(&["divisors", "figure1-A-scaled"]).status.code(), Some(3));
}

#[test]
fn check_suite_passes() {
    let o = kgnf(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("[PASS]")).count(), 6);
}
