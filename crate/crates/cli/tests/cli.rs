use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("multipeak-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], config: Option<(&Path, &str)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_multipeak"));
    if let Some((path, text)) = config {
        std::fs::write(path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.args(args).output().unwrap()
}

fn without_timestamp(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timestamp_unix").expect("timestamp field");
    v
}

const SMALL: &str = "p = 2.7\nlog_eta = 5\nh = 0.3\nmargin = 16\nscan_points = 17\nsamples = 2000\n";

#[test]
fn reruns_are_identical_apart_from_the_timestamp() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    for dir in [&a, &b] {
        let cfg = dir.join("run.cfg");
        for cmd in ["constants", "solve", "validate"] {
            let out = run(&[cmd, "--out", dir.to_str().unwrap(), "--threads", "4"], Some((&cfg, SMALL)));
            assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
    for json in ["constants.json", "report.json", "validate.json", "ground_state_2_2.7.json"] {
        assert_eq!(without_timestamp(&a.join(json)), without_timestamp(&b.join(json)), "{json}");
    }
    let tag = "1.484132e2";
    for raw in [format!("scan_{tag}.csv"), format!("solution_{tag}.bin"), "ground_state_2_2.7.csv".into()] {
        assert_eq!(std::fs::read(a.join(&raw)).unwrap(), std::fs::read(b.join(&raw)).unwrap(), "{raw}");
    }

    // the scan is ordered and the report carries C̄
    let scan = std::fs::read_to_string(a.join(format!("scan_{tag}.csv"))).unwrap();
    let rs: Vec<f64> = scan.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(rs.windows(2).all(|w| w[1] > w[0]));
    let report = without_timestamp(&a.join("report.json"));
    assert!(report["results"][0]["c_bar"].as_f64().unwrap() > 1.0);
    assert_eq!(report["passed"], Value::Bool(true));

    // a thread count change does not alter the numbers
    let cfg = a.join("run.cfg");
    let out = run(&["solve", "--out", a.to_str().unwrap(), "--threads", "1"], Some((&cfg, SMALL)));
    assert!(out.status.success());
    assert_eq!(without_timestamp(&a.join("report.json")), without_timestamp(&b.join("report.json")));

    // rescaling the solution from the unit problem
    let out = run(&["rescale", "--out", a.to_str().unwrap()], Some((&cfg, &format!("{SMALL}omega = 2\n"))));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let res = without_timestamp(&a.join("rescale.json"));
    assert!(res["results"]["residual_ratio"].as_f64().unwrap() <= 10.0);

    for d in [a, b] {
        std::fs::remove_dir_all(d).ok();
    }
}

#[test]
fn ground_state_cache_is_reused_bit_exactly() {
    let dir = scratch("cache");
    let o = dir.to_str().unwrap();
    assert!(run(&["ground-state", "--out", o], None).status.success());
    let first = std::fs::read(dir.join("ground_state_2_2.7.csv")).unwrap();
    let summary = without_timestamp(&dir.join("ground_state_2_2.7.json"));
    let out = run(&["ground-state", "--out", o], None);
    assert!(String::from_utf8_lossy(&out.stderr).contains("reusing"));
    assert_eq!(std::fs::read(dir.join("ground_state_2_2.7.csv")).unwrap(), first);
    assert_eq!(without_timestamp(&dir.join("ground_state_2_2.7.json")), summary);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = scratch("config");
    let cfg = dir.join("bad.cfg");
    let o = dir.to_str().unwrap();
    for (text, needle) in [
        ("p = 2.3\n", "p_*"),
        ("signs = +++\n", "sign condition"),
        ("signs = +-+-\nk = 4\n", "either"),
        ("dim = 3\np = 3\n", "p < 3"),
        ("colour = blue\n", "unknown key"),
        ("scan_points = x\n", "integer"),
    ] {
        let out = run(&["constants", "--out", o], Some((&cfg, text)));
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains(needle),
            "{text}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    // a missing snapshot is an i/o failure, not a pass
    let out = run(&["rescale", "--out", o], Some((&cfg, "snapshot = /nonexistent/field.bin\n")));
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(dir).ok();
}
