use std::process::{Command, Output};

use altbase::FieldElem;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altbase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).expect("json");
    assert_eq!(v["schema"], 1);
    v
}

fn err_json(args: &[&str], code: i32) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    serde_json::from_slice(&out.stderr).expect("json error")
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_string())
        .collect()
}

fn tmp(name: &str) -> String {
    std::env::temp_dir()
        .join(format!("altbase-cli-{}-{name}", std::process::id()))
        .to_string_lossy()
        .into_owned()
}

#[test]
fn compare_proportional_integers() {
    let v = ok_json(&["compare", "--pair", "7/3,3", "--pair2", "7/3,6"]);
    assert_eq!(v["equal"], true);
    assert_eq!(v["reason"], "ClosedForm");
    assert_eq!(v["exact_check"]["agrees"], true);
}

#[test]
fn compare_detects_difference() {
    let v = ok_json(&["compare", "--pair", "7/3,3", "--pair2", "7/3,4"]);
    assert_eq!(v["equal"], false);
    assert_eq!(v["exact_check"]["agrees"], true);
}

#[test]
fn density_solve_with_csv() {
    let path = tmp("density.csv");
    let v = ok_json(&[
        "density",
        "--map",
        "comp:4/3,3/2",
        "--method",
        "solve",
        "--csv",
        &path,
    ]);
    assert_eq!(strings(&v["density"]["breakpoints"]), ["0", "1/2", "1"]);
    assert_eq!(strings(&v["density"]["values"]), ["4/3", "2/3"]);
    assert_eq!(v["invariant"], true);
    assert_eq!(v["csv"]["consistent"], true);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv, "bin_lo,bin_hi,height\n0,1/2,4/3\n1/2,1,2/3\n");
    let _ = std::fs::remove_file(path);
}

#[test]
fn density_methods_agree() {
    let get = |method: &str| {
        let v = ok_json(&["density", "--map", "comp:6,7/3", "--method", method]);
        (
            strings(&v["density"]["breakpoints"]),
            strings(&v["density"]["values"]),
        )
    };
    let solve = get("solve");
    assert_eq!(solve, get("dk10"));
    assert_eq!(solve, get("closed"));
    assert_eq!(solve.1, ["9/7", "6/7"]);
}

#[test]
fn renyi_parry_golden_mean() {
    let v = ok_json(&["density", "--map", "(1+1*sqrt(5))/2", "--method", "rp"]);
    assert_eq!(v["exact"], true);
    assert_eq!(v["invariant"], true);
}

#[test]
fn exact_strings_round_trip() {
    fn walk(v: &Value, seen: &mut usize) {
        match v {
            Value::String(s) if s.parse::<FieldElem>().is_ok() => {
                let x: FieldElem = s.parse().unwrap();
                assert_eq!(x.to_string().parse::<FieldElem>().unwrap(), x);
                *seen += 1;
            }
            Value::Array(a) => a.iter().for_each(|x| walk(x, seen)),
            Value::Object(o) => o.values().for_each(|x| walk(x, seen)),
            _ => {}
        }
    }
    let beta = "(3+1*sqrt(13))/4";
    let mut seen = 0;
    for args in [
        vec!["partition", "--map", "comp:4/3,9/2", "--rank", "3"],
        vec!["density", "--map", "comp:2,(3+1*sqrt(13))/4"],
        vec!["orbit", "--map", "comp:2,(3+1*sqrt(13))/4"],
        vec!["expand", "--bases", beta, "--x", "1/3", "--digits", "8"],
    ] {
        walk(&ok_json(&args), &mut seen);
    }
    assert!(seen > 20);
}

#[test]
fn orbit_growing_denominators() {
    let v = ok_json(&["orbit", "--map", "comp:5/3,7/4", "--point", "one"]);
    assert_eq!(v["orbit"]["status"]["kind"], "DiagnosedInfinite");
    assert_eq!(v["orbit"]["status"]["reason"]["z"], "3");
}

#[test]
fn exit_codes() {
    let e = err_json(&["orbit", "--map", "comp:x"], 2);
    assert_eq!(e["error"]["code"], "ParseError");
    let e = err_json(&["density", "--map", "comp:5/3,7/4"], 3);
    assert_eq!(e["error"]["code"], "OrbitNotFinite");
    let e = err_json(&["nonsense"], 2);
    assert_eq!(e["error"]["code"], "UsageError");
    let e = err_json(&["compare", "--pair", "7/3", "--pair2", "7/3,6"], 2);
    assert_eq!(e["error"]["code"], "UsageError");
}

#[test]
fn max_bits_env() {
    let out = Command::new(env!("CARGO_BIN_EXE_altbase"))
        .args(["orbit", "--map", "comp:3,7/3"])
        .env("ALTBASE_MAX_BITS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_altbase"))
        .args(["orbit", "--map", "comp:3,7/3"])
        .env("ALTBASE_MAX_BITS", "64")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn simulate_independent_of_jobs() {
    let args = |jobs: &'static str| {
        vec![
            "simulate",
            "--map",
            "comp:3,7/3",
            "--iters",
            "200000",
            "--bins",
            "30",
            "--seed",
            "5",
            "--jobs",
            jobs,
        ]
    };
    let a = ok_json(&args("1"));
    let b = ok_json(&args("4"));
    assert_eq!(a["histogram"], b["histogram"]);
    assert_eq!(a["histogram"]["approximate"], true);
}

#[test]
fn ulam_csv_matches_json() {
    let path = tmp("ulam.csv");
    let v = ok_json(&[
        "ulam",
        "--map",
        "comp:4/3,3/2",
        "--cells",
        "100",
        "--csv",
        &path,
    ]);
    assert_eq!(v["csv"]["consistent"], true);
    assert!(v["l1_to_exact"]["value"].as_f64().unwrap() < 1e-6);
    let rows = std::fs::read_to_string(&path).unwrap().lines().count();
    assert_eq!(rows, 101);
    let _ = std::fs::remove_file(path);
}

#[test]
fn search_independent_of_jobs() {
    let a = ok_json(&[
        "search", "--pmax", "5", "--denmax", "3", "--nmax", "6", "--jobs", "1",
    ]);
    let b = ok_json(&[
        "search", "--pmax", "5", "--denmax", "3", "--nmax", "6", "--jobs", "3",
    ]);
    assert_eq!(a["coincidences"], b["coincidences"]);
    assert_eq!(a["all_predicted"], true);
}
