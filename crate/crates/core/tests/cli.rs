use std::path::Path;

use gwldp::cli::dispatch;

const PRODUCT: &str = r#"{
    "types": ["a", "b"],
    "root": {"a": 0.5, "b": 0.5},
    "law": {"kary": 2},
    "pair": {"a": {"a": 0.7, "b": 0.3}, "b": {"a": 0.4, "b": 0.6}}
}"#;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gwldp").chain(args.iter().copied());
    let code = dispatch(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .parse()
        .unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage"));
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    assert!(err.contains("frobnicate"));
    assert_eq!(run(&["sizelaw"]).0, 2);
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &PRODUCT.replace("0.7", "\"x\""));
    let (code, _, err) = run(&["--model", &bad, "model", "validate"]);
    assert_eq!(code, 2);
    assert!(err.contains("pair.a.a"), "{err}");
    let (code, _, err) = run(&["model", "validate"]);
    assert_eq!(code, 2);
    assert!(err.contains("--model"));
}

#[test]
fn domain_errors_exit_one_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", PRODUCT);
    let (code, _, err) = run(&["--model", &m, "sample", "--n", "4"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[not_admissible]"), "{err}");
}

#[test]
fn validate_reports_critical_model() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", PRODUCT);
    let (code, out, _) = run(&["--model", &m, "model", "validate"]);
    assert_eq!(code, 0);
    assert!((value(&out, "rho") - 1.0).abs() < 1e-12);
    assert!(out.contains("critical=true"));
    assert!(out.contains("irreducible=true"));
}

#[test]
fn sizelaw_matches_catalan_numbers() {
    // Binary law: P{|T| = 2m+1} = Cat(m) 2^{-(2m+1)}.
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", PRODUCT);
    let (code, out, _) = run(&["--model", &m, "sizelaw", "--nmax", "9"]);
    assert_eq!(code, 0);
    let rows: Vec<Vec<&str>> =
        out.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    let catalan = [1.0, 1.0, 2.0, 5.0, 14.0];
    for (m, c) in catalan.iter().enumerate() {
        let row = &rows[2 * m];
        let lp: f64 = row[1].parse().unwrap();
        let expected = (c / 2f64.powi(2 * m as i32 + 1)).ln();
        assert!((lp - expected).abs() < 1e-12, "n = {}", 2 * m + 1);
        assert_eq!(row[2], "true");
    }
    for even in rows.iter().skip(1).step_by(2) {
        assert_eq!(even[1], "-inf");
        assert_eq!(even[2], "false");
    }
}

#[test]
fn seeded_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", PRODUCT);
    let args = ["--model", &m, "--seed", "17", "sample", "--n", "11", "--count", "5"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 5);
    let mc = ["--model", &m, "--seed", "3", "experiment", "ldp", "--event", "a,a>=0.5", "--ns", "9", "--method", "mc",
        "--samples", "2000", "--grid", "0"];
    assert_eq!(run(&mc).1, run(&mc).1);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", PRODUCT);
    let target = dir.path().join("decay.csv");
    let (code, out, _) =
        run(&["--model", &m, "--out", target.to_str().unwrap(), "experiment", "decay", "--nmax", "7"]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let csv = std::fs::read_to_string(target).unwrap();
    assert!(csv.contains("# config_sha256="));
    assert!(csv.contains("x,value,reference,std_err,note"));
}

#[test]
fn pair_rate_vanishes_at_the_law_of_large_numbers() {
    // The zero of the pair rate is the stationary edge measure pi(a) P(a, b).
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", PRODUCT);
    let pi = [4.0 / 7.0, 3.0 / 7.0];
    let p = [[0.7, 0.3], [0.4, 0.6]];
    let measure = format!(
        r#"{{"pair": {{"a": {{"a": {}, "b": {}}}, "b": {{"a": {}, "b": {}}}}}}}"#,
        pi[0] * p[0][0],
        pi[0] * p[0][1],
        pi[1] * p[1][0],
        pi[1] * p[1][1]
    );
    let f = write(dir.path(), "mu.json", &measure);
    let (code, out, err) = run(&["--model", &m, "rate", "pair", "--measure", &f, "--contraction"]);
    assert_eq!(code, 0, "{err}");
    assert!(value(&out, "value").abs() < 1e-10);
    assert!(value(&out, "contraction_value").abs() < 1e-10);
}

#[test]
fn empirical_counts_of_a_given_tree() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", PRODUCT);
    let (code, out, _) = run(&["--model", &m, "empirical", "--kind", "pair", "--tree", "a(b,a(b,b))"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"a>b\",3,"));
    assert!(out.contains("\"a>a\",1,"));
    let (code, _, err) = run(&["--model", &m, "empirical", "--kind", "pair", "--tree", "a(b"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error["));
}

#[test]
fn genetic_rate_is_zero_at_the_fixed_point() {
    let (code, out, _) = run(&["rate", "genetic"]);
    assert_eq!(code, 0);
    assert!(value(&out, "value").abs() < 1e-12);
    let (code, out, _) = run(&["rate", "genetic", "--x", "1.0"]);
    assert_eq!(code, 0);
    assert!(value(&out, "value") > 1e-4);
}

#[test]
fn verify_one_criterion() {
    let (code, out, _) = run(&["verify", "one", "--id", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains("[PASS]"));
    assert_eq!(run(&["verify", "one", "--id", "99"]).0, 2);
}
