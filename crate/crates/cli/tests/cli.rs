use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn gensub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gensub")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn density_eval_at_origin() {
    let o = gensub(&["density", "eval", "--law", "qaqa", "--mu", "0.5", "--gamma", "2", "--t", "1", "--x", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let x = v["value"].as_f64().unwrap();
    assert!((x - 2.0 / std::f64::consts::PI).abs() < 1e-14, "{x}");
}

#[test]
fn multivariate_density_by_point() {
    let o = gensub(&["density", "eval", "--law", "multi_bg1", "--mu", "1.3", "--n", "2", "--t", "1", "--point", "0.3,-0.4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn missing_flag_is_a_usage_error() {
    let o = gensub(&["density", "eval", "--law", "qaqa", "--mu", "0.5", "--gamma", "2", "--x", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = gensub(&["density", "eval", "--law", "qaqa", "--mu", "0.5", "--t", "1", "--x", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_csv_is_independent_of_thread_count() {
    let args = ["sample", "--expr", "compose(ggt(2, 0.5), ggt(-2, 0.5))", "--t", "1.5", "--n", "20000", "--seed", "9"];
    let one = gensub(&[&["--jobs", "1"], &args[..]].concat());
    let four = gensub(&[&["--jobs", "4"], &args[..]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let text = stdout(&one);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# expr_digest="), "{header}");
    assert!(header.contains(" t=1.5") && header.ends_with(" seed=9"), "{header}");
    let values: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 20000);
    assert!(values.iter().all(|v| *v > 0.0));
}

#[test]
fn verify_mellin_suite_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("out.json");
    let o = gensub(&["verify", "run", "--suite", "mellin", "--json", path(&json)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let total = v["summary"]["total"].as_u64().unwrap();
    assert!(total > 20);
    assert_eq!(v["summary"]["passed"].as_u64().unwrap(), total);

    let csv = dir.path().join("merged.csv");
    let o = gensub(&["report", path(&json), path(&json), "--out", path(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("case_id,method,statistic,threshold,bound,passed\n"));
    assert_eq!(text.lines().count(), 2 + 2 * total as usize);
    assert!(text.trim_end().ends_with(&format!("total={} passed={} failed=0", 2 * total, 2 * total)));
}

#[test]
fn verify_json_is_bit_identical_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (j, p) in [("1", &a), ("3", &b)] {
        let o = gensub(&["--jobs", j, "verify", "run", "--suite", "pde", "--samples", "20000", "--json", path(p)]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn failing_verification_exits_with_one() {
    let o = gensub(&["verify", "run", "--suite", "mc", "--case", "gamma-power", "--samples", "2000", "--alpha", "0.999", "--seed-set", "1..3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = gensub(&["verify", "run", "--suite", "mellin", "--json", "/nonexistent-dir/x.json"]);
    assert_eq!(o.status.code(), Some(3));
    let o = gensub(&["report", "/nonexistent-dir/in.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn mellin_prove_prints_both_forms() {
    let o = gensub(&["mellin", "prove", "cauchy-tilde-subordination"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["lhs_form"]["factors"].is_array() && v["rhs_form"]["factors"].is_array());
    assert!(v["comparison"]["max_rel_dev"].as_f64().unwrap() < 1e-9);
    let o = gensub(&["mellin", "prove", "no-such-case"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "jobs = 2\n[sample]\nn = 5\nt = 2.0\nseed = 3\n").unwrap();
    let o = gensub(&["--config", path(&cfg), "sample", "--expr", "gg(1, 1)"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("# expr_digest=") && text.lines().next().unwrap().ends_with("t=2.0000000000000000 seed=3"));
    let o = gensub(&["--config", path(&cfg), "sample", "--expr", "gg(1, 1)", "--n", "2", "--seed", "4"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().next().unwrap().ends_with("seed=4"));

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let o = gensub(&["--config", path(&cfg), "density", "list"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gensub(&["--config", "/nonexistent-dir/c.toml", "density", "list"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn hfox_eval_exponential() {
    let o = gensub(&["hfox", "eval", "--x", "1.3", "--lower", "0:1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - (-1.3f64).exp()).abs() < 1e-12);
    assert!(v["T_used"].as_f64().unwrap() > 0.0);
}
