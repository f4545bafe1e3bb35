use std::path::Path;
use std::process::{Command, Output};

fn cvwit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvwit"))
        .args(args)
        .env_remove("CVW_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_cm(dir: &Path, name: &str, n: usize, a: f64, b: f64, c: f64) -> String {
    let p = dir.join(name);
    let doc = serde_json::json!({"format_version": 1, "n": n, "kind": "symmetric", "a": a, "b": b, "c": c});
    std::fs::write(&p, doc.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

fn ghz(n: usize, r: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    let (e, ie) = ((2.0 * r).exp(), (-2.0 * r).exp());
    ((e + (nf - 1.0) * ie) / nf, ((nf - 1.0) * e + ie) / nf, 2.0 * (2.0 * r).sinh() / nf)
}

#[test]
fn certify_exit_codes() {
    let o = cvwit(&["certify", "--n", "100", "--eta", "0.999", "--noise-n", "1e-4", "--r", "0.5"]);
    assert_eq!(o.status.code(), Some(10));
    let s = stdout(&o);
    assert!(s.contains("m = 6"), "{s}");
    assert!(s.contains("verdict: certified"));

    // beyond the additional-condition cap
    let o = cvwit(&["certify", "--n", "100", "--eta", "0.999", "--noise-n", "1e-4", "--r", "0.9"]);
    assert_eq!(o.status.code(), Some(11));

    let o = cvwit(&["certify", "--n", "100", "--eta", "1.5", "--r", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cvwit(&["certify", "--n", "100", "--v", "0.1", "--noise-n", "0.1", "--r", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certify_json() {
    let o = cvwit(&["certify", "--n", "10", "--v", "0.001", "--eta", "0.99", "--r", "0.4", "--json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["n"], 10);
    assert_eq!(v["certified"].as_bool().unwrap(), o.status.code() == Some(10));
}

#[test]
fn region_csv_and_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = cvwit(&[
        "region", "--n", "20", "--eta", "0.9:1:0.05", "--v", "0:0.02:0.01", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eta,v,r_threshold_low,r_threshold_high,additional_condition");
    assert_eq!(lines.len(), 1 + 9 + 1);
    assert!(lines.last().unwrap().starts_with("# config: {"));
    let b = std::fs::read_to_string(dir.path().join("r.csv.boundary.csv")).unwrap();
    assert!(b.starts_with("v,eta_min,"));
    assert_eq!(b.lines().count(), 1 + 3 + 1);
}

#[test]
fn region_is_deterministic() {
    let args = ["--seed", "3", "--threads", "2", "region", "--n", "1000", "--eta", "0.99:1:0.002", "--v", "0:0.01:0.002"];
    let a = cvwit(&args);
    let b = cvwit(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn region_rejects_bad_range() {
    assert_eq!(cvwit(&["region", "--n", "10", "--eta", "1:0.5:0.1", "--v", "0"]).status.code(), Some(2));
    assert_eq!(cvwit(&["region", "--n", "10", "--eta", "0.5", "--v", "1.2"]).status.code(), Some(2));
}

#[test]
fn tables_match_published_prefix() {
    let o = cvwit(&["tables", "--class", "genuine", "--to", "1058"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().all(|l| l.ends_with(" =")), "{s}");
}

#[test]
fn tables_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = cvwit(&["tables", "--class", "trisep", "--to", "100", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("m,layout,n_start,n_end,printed_n_start,printed_n_end,diff\n"));
    assert!(text.contains("\"tables\""));
}

#[test]
fn check_cm_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = ghz(4, 0.6);
    let p = write_cm(dir.path(), "ghz.json", 4, a, b, c);
    let o = cvwit(&["check-cm", &p]);
    assert_eq!(o.status.code(), Some(10), "{}", stdout(&o));

    let vac = write_cm(dir.path(), "vac.json", 4, 1.0, 1.0, 0.0);
    assert_eq!(cvwit(&["check-cm", &vac]).status.code(), Some(11));
    assert_eq!(cvwit(&["check-cm", &vac, "--class", "prod:2"]).status.code(), Some(11));

    let big = write_cm(dir.path(), "big.json", 13, 1.0, 1.0, 0.0);
    assert_eq!(cvwit(&["check-cm", &big]).status.code(), Some(3));
}

#[test]
fn check_cm_parse_error_has_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"format_version\": 1,\n \"n\": 4, \"kind\"").unwrap();
    let o = cvwit(&["check-cm", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn producibility_nested() {
    let o = cvwit(&["producibility", "--n", "20", "--j", "19:15", "--eta", "0.99", "--v", "0.001"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("# nested_by_j: true"), "{s}");
    assert_eq!(s.lines().filter(|l| l.contains("-producible")).count(), 5);

    let o = cvwit(&["producibility", "--n", "10", "--j", "10"]);
    let s = stdout(&o);
    assert!(s.contains("10-producible,10,,,nan,nan,nan,nan"), "{s}");
}

#[test]
fn oracle_suites() {
    let o = cvwit(&["oracle", "signset3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.starts_with("PASS")));
    let o = cvwit(&["oracle", "kappa-small", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    for l in stdout(&o).lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["pass"], true);
    }
    assert_eq!(cvwit(&["oracle", "nope"]).status.code(), Some(2));
}

#[test]
fn kappa_exact() {
    let o = cvwit(&["kappa", "--n", "8", "--m", "3", "--sizes", "2,3,3", "--exact"]);
    assert!(stdout(&o).contains("kappa (exact): 2/7"));
    let o = cvwit(&["kappa", "--n", "4", "--m", "2", "--n0", "3", "--exact"]);
    assert!(stdout(&o).contains("kappa (exact): 1/2"), "{}", stdout(&o));
}
