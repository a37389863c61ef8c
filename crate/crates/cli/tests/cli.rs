//! End-to-end runs of the binary.

use std::collections::HashMap;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shuffle-amp")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

type Record = HashMap<String, String>;

fn records(o: &Output) -> Vec<Record> {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn num(r: &Record, col: &str) -> f64 {
    r[col].parse().unwrap_or_else(|_| panic!("{col} = {:?}", r[col]))
}

#[test]
fn zero_local_budget_gives_zero() {
    let o = run(&["eps", "--eps0", "0", "--n", "100", "--delta", "1e-6"]);
    assert_eq!(code(&o), 0);
    let rows = records(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(num(&rows[0], "value"), 0.0);
}

#[test]
fn general_bound_not_above_fmt20() {
    let o = run(&["eps", "--eps0", "4", "--n", "1000000", "--delta", "1e-6", "--variant", "general-extremal", "--variant", "fmt20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = records(&o);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["variant"], "general-extremal");
    assert_eq!(rows[1]["variant"], "fmt20");
    assert!(num(&rows[0], "value") <= num(&rows[1], "value"));
    for r in &rows {
        assert!(num(r, "lower") <= num(r, "value") && num(r, "value") <= num(r, "upper"));
    }
    // the extremal-class caveat goes to stderr, never into the data
    assert!(String::from_utf8_lossy(&o.stderr).contains("extremal class"));
}

#[test]
fn analytic_out_of_range_is_a_precondition_failure() {
    let o = run(&["eps", "--eps0", "10", "--n", "100", "--delta", "1e-6", "--variant", "analytic"]);
    assert_eq!(code(&o), 3);
    assert!(!records(&o)[0]["error"].is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["sweep", "--quantity", "adp-eps", "--eps0", "", "--n", "10", "--delta", "1e-6"])), 2);
    assert_eq!(code(&run(&["eps", "--eps0", "1", "--n", "10", "--delta", "1e-6", "--variant", "bogus"])), 2);
    assert_eq!(code(&run(&["eps", "--eps0", "1", "--n", "10"])), 2);
    assert_eq!(code(&run(&["eps", "--eps0", "1", "--n", "10", "--delta", "2"])), 2);
    assert_eq!(code(&run(&["eps", "--no-such-flag"])), 2);
    assert_eq!(code(&run(&["krr", "--eps0", "1", "--n", "10", "--k", "3"])), 2);
    assert_eq!(code(&run(&["eps", "--eps0", "1", "--n", "10", "--delta", "1e-6", "--variant", "custom"])), 2);
}

#[test]
fn rdp_sweep_has_four_series_in_grid_order() {
    let o = run(&[
        "sweep", "--quantity", "rdp-eps", "--eps0", "4", "--n", "2000", "--alpha", "1.5,4,16", "--variant", "general-extremal",
        "--variant", "fmt20", "--variant", "closedform", "--variant", "lower",
    ]);
    assert_eq!(code(&o), 0);
    let rows = records(&o);
    assert_eq!(rows.len(), 12);
    let variants: Vec<&str> = rows[..4].iter().map(|r| r["variant"].as_str()).collect();
    assert_eq!(variants, ["general-extremal", "fmt20", "closedform", "lower"]);
    let alphas: Vec<f64> = rows.iter().step_by(4).map(|r| num(r, "alpha")).collect();
    assert_eq!(alphas, [1.5, 4.0, 16.0]);
    for chunk in rows.chunks(4) {
        // closed form needs much larger n at eps0 = 4
        assert!(!chunk[2]["error"].is_empty());
        let (general, fmt20, lower) = (num(&chunk[0], "value"), num(&chunk[1], "value"), num(&chunk[3], "value"));
        assert!(lower <= num(&chunk[0], "upper") && general <= fmt20 + 1e-12, "{chunk:?}");
    }
    assert!(String::from_utf8_lossy(&o.stderr).contains("[4/4]"));
}

#[test]
fn krr_sweep_carries_general_reference() {
    let o = run(&["sweep", "--quantity", "krr", "--eps0", "2", "--n", "300", "--k", "2,3,6", "--delta", "1e-6"]);
    assert_eq!(code(&o), 0);
    let rows = records(&o);
    assert_eq!(rows.len(), 6);
    let reference = num(&rows[0], "general_ref");
    for pair in rows.chunks(2) {
        assert_eq!(pair[0]["variant"], "upper");
        assert_eq!(pair[1]["variant"], "lower");
        assert_eq!(num(&pair[0], "general_ref"), reference);
        assert!(num(&pair[1], "value") <= num(&pair[0], "value"));
        assert!(num(&pair[0], "value") <= reference + 1e-4);
    }
}

#[test]
fn sweep_exit_codes_follow_failures() {
    let all = run(&["sweep", "--quantity", "adp-eps", "--eps0", "9,10", "--n", "100", "--delta", "1e-6", "--variant", "analytic"]);
    assert_eq!(code(&all), 4);
    assert_eq!(records(&all).len(), 2);
    let some = run(&["sweep", "--quantity", "adp-eps", "--eps0", "0.1,10", "--n", "100000", "--delta", "1e-6", "--variant", "analytic"]);
    assert_eq!(code(&some), 0);
    let rows = records(&some);
    assert!(rows[0]["error"].is_empty() && !rows[1]["error"].is_empty());
}

#[test]
fn compose_reports_both_routes() {
    let o = run(&["compose", "--eps0", "1", "--n", "1000", "--delta", "1e-6", "--T", "1,50"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = records(&o);
    let routes: Vec<(&str, &str)> = rows.iter().map(|r| (r["T"].as_str(), r["variant"].as_str())).collect();
    assert_eq!(routes, [("1", "rdp"), ("1", "advanced"), ("50", "rdp"), ("50", "advanced")]);
    assert!(num(&rows[2], "value") > num(&rows[0], "value"));
}

#[test]
fn json_and_base2_agree_with_csv() {
    let args = ["eps", "--eps0", "1", "--n", "500", "--delta", "1e-5"];
    let csv = records(&run(&args));
    let mut with_json = args.to_vec();
    with_json.extend(["--format", "json", "--base2"]);
    let o = run(&with_json);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let bits = v[0]["value"].as_f64().unwrap();
    assert_eq!(v[0]["unit"], "bits");
    assert!((bits * std::f64::consts::LN_2 - num(&csv[0], "value")).abs() < 1e-12);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let strip = |o: &Output| -> Vec<Vec<String>> {
        records(o)
            .iter()
            .map(|r| ["eps0", "n", "delta", "variant", "value", "lower", "upper"].iter().map(|c| r[*c].clone()).collect())
            .collect()
    };
    let base = ["eps", "--eps0", "0.5,2", "--n", "100,400", "--delta", "1e-6,1e-3", "--variant", "general-extremal", "--variant", "fmt20"];
    let mut one = base.to_vec();
    one.extend(["--jobs", "1"]);
    let mut many = base.to_vec();
    many.extend(["--jobs", "4"]);
    let (a, b) = (run(&one), run(&many));
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(strip(&a).len(), 16);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = std::env::temp_dir().join(format!("shuffle-amp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("eps.csv");
    let o = run(&["eps", "--eps0", "1", "--n", "100", "--delta", "1e-6", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("eps0,n,delta,variant,value,lower,upper,unit,seconds,note,error"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn decompose_builtin_randomizers() {
    let krr = records(&run(&["decompose", "krr:4:1.5"]));
    let e = 1.5f64.exp();
    assert!((num(&krr[0], "p") - 1.0 / (e + 3.0)).abs() < 1e-12);
    assert!((num(&krr[0], "q") - 2.0 / (e + 3.0)).abs() < 1e-12);
    assert_eq!(krr[0]["member"], "true");

    let uniform = records(&run(&["decompose", "uniform:3:4"]));
    assert_eq!(num(&uniform[0], "eps0_hat"), 0.0);

    // unary-encoding RAPPOR at its tight level fails the membership test
    let rappor = records(&run(&["decompose", "rappor:3:0.75:0.25"]));
    assert_eq!(rappor[0]["member"], "false");
    assert_eq!(rappor[0]["worst_output"], "110");
    assert!(num(&rappor[0], "residual") <= 1e-10);
    // and passes once eps0 reaches ln(2r - 1) with r = 9
    let relaxed = records(&run(&["decompose", "rappor:3:0.75:0.25", "--eps0", &17f64.ln().to_string()]));
    assert_eq!(relaxed[0]["member"], "true");
}

#[test]
fn decompose_chains_into_bounds() {
    let o = run(&["decompose", "krr:4:1.5", "--n", "500", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let custom = v["eps_custom"].as_f64().unwrap();
    let general = v["eps_general"].as_f64().unwrap();
    let fmt20 = v["eps_fmt20"].as_f64().unwrap();
    assert!(custom <= general + 1e-4 && general <= fmt20);
}

#[test]
fn decompose_reads_csv_and_rejects_loose_eps0() {
    let dir = std::env::temp_dir().join(format!("shuffle-amp-dec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.csv");
    std::fs::write(&path, "input,a,b\nyes,0.75,0.25\nno,0.25,0.75\n").unwrap();
    let p = path.to_str().unwrap();
    let ok = run(&["decompose", p, "--x0", "yes", "--x1", "no"]);
    assert_eq!(code(&ok), 0);
    let r = records(&ok);
    assert!((num(&r[0], "eps0_hat") - 3f64.ln()).abs() < 1e-12);
    assert_eq!(r[0]["member"], "true");
    assert_eq!(code(&run(&["decompose", p, "--eps0", "0.5"])), 3);
    assert_eq!(code(&run(&["decompose", p, "--x0", "maybe"])), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_quick_passes_and_is_repeatable() {
    let a = run(&["verify"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    let b = run(&["verify", "--level", "quick"]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.lines().count() >= 7 && text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn help_documents_schema() {
    let o = run(&["sweep", "--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("CSV COLUMNS") && text.contains("general_ref"));
}
