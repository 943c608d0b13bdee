use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn subhj(task: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_subhj"))
        .arg(task)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .status()
        .expect("binary runs");
    status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn eikonal() -> Value {
    json(&configs().join("eikonal_box.json"))
}

#[test]
fn solve_writes_solution_bcc_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(subhj("solve", &configs().join("eikonal_box.json"), tmp.path(), &[]), 0);
    for f in ["w.csv", "bcc.json", "manifest.json", "boundary.csv", "solve.json"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    let m = json(&tmp.path().join("manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["exit_code"], 0);
    assert!(m["files"].as_array().unwrap().iter().any(|f| f == "w.csv"));
    assert_eq!(json(&tmp.path().join("bcc.json"))["passed"], true);
    let s = json(&tmp.path().join("solve.json"));
    let w = s["probes"][0]["w"].as_f64().unwrap();
    assert!((w - 0.5).abs() <= 2.0 / 32.0, "{w}");
    let csv = fs::read_to_string(tmp.path().join("w.csv")).unwrap();
    assert!(csv.starts_with("y1,y2,w\n") && !csv.contains('\r'));
}

#[test]
fn verify_fails_at_cone_vertex() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(subhj("verify", &configs().join("cone.json"), tmp.path(), &[]), 1);
    let m = json(&tmp.path().join("manifest.json"));
    assert_eq!(m["status"], "failed");
    assert!(m["error"].as_str().unwrap().contains("1 of 2"));
    let r = json(&tmp.path().join("residual.json"));
    assert_eq!(r["verdicts"][0]["violated"]["side"], "supersolution");
    assert_eq!(r["verdicts"][1], "solution_ok");
}

#[test]
fn probe_reports_half_slope_on_the_heisenberg_axis() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(subhj("probe", &configs().join("heis_scaling.json"), tmp.path(), &[]), 0);
    let csv = fs::read_to_string(tmp.path().join("probe.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().rsplit(',').next(), Some("slope"));
    for l in lines {
        let slope: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!((slope - 0.5).abs() <= 0.1, "{l}");
    }
}

#[test]
fn remaining_example_configs_succeed() {
    for name in ["split_heisenberg", "compare_box", "stability_box", "distance_heisenberg"] {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = configs().join(format!("{name}.json"));
        let task = json(&cfg)["task"].as_str().unwrap().to_owned();
        assert_eq!(subhj(&task, &cfg, tmp.path(), &[]), 0, "{name}");
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = configs().join("compare_box.json");
    assert_eq!(subhj("compare", &cfg, a.path(), &[]), 0);
    assert_eq!(subhj("compare", &cfg, b.path(), &[]), 0);
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 3);
    for n in names {
        let (x, y) = (fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap());
        if n == "manifest.json" {
            let strip = |b: &[u8]| {
                let mut v: Value = serde_json::from_slice(b).unwrap();
                v.as_object_mut().unwrap().remove("timestamp");
                v
            };
            assert_eq!(strip(&x), strip(&y));
        } else {
            assert_eq!(x, y, "{n:?}");
        }
    }
}

#[test]
fn seed_and_spacing_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("compare_box.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(subhj("compare", &cfg, &a, &["--seed", "99", "--spacing", "0.125"]), 0);
    assert_eq!(subhj("compare", &cfg, &b, &[]), 0);
    let m = json(&a.join("manifest.json"));
    assert_eq!((m["seed"].as_u64(), m["spacing"].as_f64()), (Some(99), Some(0.125)));
    assert_ne!(fs::read(a.join("compare.json")).unwrap(), fs::read(b.join("compare.json")).unwrap());
}

#[test]
fn tabulated_boundary_reproduces_the_analytic_solve() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = eikonal();
    cfg["params"]["boundary"] = serde_json::json!({"formula": "0.3 * y1 - 0.1 * y2"});
    let first = write_config(tmp.path(), "first.json", &cfg);
    assert_eq!(subhj("solve", &first, &tmp.path().join("a"), &[]), 0);
    cfg["params"]["boundary"] = serde_json::json!({"csv": "a/boundary.csv"});
    let second = write_config(tmp.path(), "second.json", &cfg);
    assert_eq!(subhj("solve", &second, &tmp.path().join("b"), &[]), 0);
    assert_eq!(fs::read(tmp.path().join("a/w.csv")).unwrap(), fs::read(tmp.path().join("b/w.csv")).unwrap());
}

#[test]
fn exit_codes_for_parse_validation_and_task_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let garbage = tmp.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(subhj("solve", &garbage, &tmp.path().join("p"), &[]), 2);
    let m = json(&tmp.path().join("p/manifest.json"));
    assert_eq!((m["status"].as_str(), m["exit_code"].as_i64()), (Some("failed"), Some(2)));

    let mut cfg = eikonal();
    cfg["params"]["boundary"] = serde_json::json!({"formula": "0 +"});
    let bad_formula = write_config(tmp.path(), "bad_formula.json", &cfg);
    assert_eq!(subhj("solve", &bad_formula, &tmp.path().join("f"), &[]), 2);

    let mut cfg = eikonal();
    cfg["hamiltonian"]["pieces"][0]["zset"]["r"] = 3.0.into();
    let too_big = write_config(tmp.path(), "too_big.json", &cfg);
    assert_eq!(subhj("solve", &too_big, &tmp.path().join("v"), &[]), 3);
    assert_eq!(json(&tmp.path().join("v/validation.json"))["passed"], false);

    assert_eq!(subhj("distance", &configs().join("eikonal_box.json"), &tmp.path().join("t"), &[]), 3);

    let mut cfg = eikonal();
    cfg["params"]["boundary"] = serde_json::json!({"formula": "3 * y1"});
    let steep = write_config(tmp.path(), "steep.json", &cfg);
    assert_eq!(subhj("solve", &steep, &tmp.path().join("s"), &[]), 1);
    assert_eq!(json(&tmp.path().join("s/bcc.json"))["passed"], false);
    assert!(!tmp.path().join("s/w.csv").exists());
    cfg["params"]["override_bcc"] = true.into();
    let forced = write_config(tmp.path(), "forced.json", &cfg);
    assert_eq!(subhj("solve", &forced, &tmp.path().join("o"), &[]), 0);
    assert_eq!(json(&tmp.path().join("o/solve.json"))["overridden"], true);
}

#[test]
fn schema_lists_every_config_key() {
    let schema = json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/run-config.schema.json"));
    let props = schema["properties"].as_object().unwrap();
    for entry in fs::read_dir(configs()).unwrap() {
        let cfg = json(&entry.unwrap().path());
        for key in cfg.as_object().unwrap().keys() {
            assert!(props.contains_key(key), "{key}");
        }
        let task = cfg["task"].as_str().unwrap();
        let params = &schema["$defs"][format!("params_{task}")]["properties"];
        for key in cfg["params"].as_object().unwrap().keys() {
            assert!(params.get(key).is_some(), "{task}.{key}");
        }
    }
}
