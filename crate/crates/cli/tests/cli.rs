use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn paretoc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paretoc"))
        .args(args)
        .current_dir(dir)
        .env_remove("PARETOC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_complex_and_summary() {
    let dir = TempDir::new().unwrap();
    let o = paretoc(dir.path(), &["run", "--problem", "triv", "--grid", "20x20", "--out", "triv.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("critical_stable"), "{text}");
    let doc = json(&dir.path().join("triv.json"));
    assert_eq!(doc["version"], 1);
    assert_eq!(doc["ambient_dim"], 2);
    assert_eq!(doc["objectives"], 2);
    assert_eq!(doc["provenance"]["problem"], "triv");
    assert_eq!(doc["provenance"]["grid"], "20x20");
    let strata: Vec<&str> = doc["simplices"].as_array().unwrap().iter().map(|s| s["stratum"].as_str().unwrap()).collect();
    assert!(strata.contains(&"critical_stable"));
    assert!(strata.iter().all(|s| ["singular_only", "critical_unstable", "critical_stable"].contains(s)));
}

#[test]
fn default_output_name_and_constrained_run() {
    let dir = TempDir::new().unwrap();
    let o = paretoc(dir.path(), &["run", "--problem", "sphere_proj", "--subdiv", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&dir.path().join("sphere_proj.json"));
    assert_eq!(doc["ambient_dim"], 3);
    assert_eq!(doc["provenance"]["grid"], "subdiv:1");
    // First order only: multipliers but no Hessian eigenvalues.
    assert!(doc["vertices"].as_array().unwrap().iter().all(|v| v["sigma"].is_null()));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for (out, threads) in [("a.json", "1"), ("b.json", "3")] {
        let o = paretoc(dir.path(), &["run", "--problem", "smale", "--grid", "random:200:seed=7", "-o", out, "--threads", threads]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    let b = fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn distance_to_itself_is_zero() {
    let dir = TempDir::new().unwrap();
    paretoc(dir.path(), &["run", "--problem", "noncv", "--grid", "30x30", "-o", "c.json"]);
    let o = paretoc(dir.path(), &["distance", "c.json", "c.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("hausdorff=0.000000e0 "), "{}", stdout(&o));
}

#[test]
fn distance_between_resolutions_is_small() {
    let dir = TempDir::new().unwrap();
    paretoc(dir.path(), &["run", "--problem", "triv", "--grid", "15x14", "-o", "coarse.json"]);
    paretoc(dir.path(), &["run", "--problem", "triv", "--grid", "57x53", "-o", "fine.json"]);
    let o = paretoc(dir.path(), &["distance", "coarse.json", "fine.json", "--strata", "stable"]);
    let line = stdout(&o);
    let d: f64 = line.split_whitespace().next().unwrap().trim_start_matches("hausdorff=").parse().unwrap();
    assert!(d > 0.0 && d < 0.05, "{line}");
}

#[test]
fn iterate_writes_every_iteration_and_history() {
    let dir = TempDir::new().unwrap();
    let o = paretoc(
        dir.path(),
        &["iterate", "--problem", "triv", "--grid", "20x20", "--iterations", "2", "--out-dir", "out", "--against-final"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for i in 1..=3 {
        let doc = json(&dir.path().join(format!("out/iteration_{i:03}.json")));
        assert_eq!(doc["provenance"]["iterations"], i);
    }
    let csv = fs::read_to_string(dir.path().join("out/history.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "iteration,nodes,max_minor,mean_minor,hausdorff_to_ref");
    assert_eq!(lines.len(), 4);
    let nodes: Vec<usize> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(nodes.windows(2).all(|w| w[1] > w[0]), "{nodes:?}");
    let last_ref: f64 = lines[3].split(',').nth(4).unwrap().parse().unwrap();
    assert_eq!(last_ref, 0.0);
}

#[test]
fn iterate_zero_is_the_initial_run() {
    let dir = TempDir::new().unwrap();
    let o = paretoc(dir.path(), &["iterate", "--problem", "smale", "--grid", "20x20", "--iterations", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().ends_with(','), "no reference leaves the last field empty");
    assert!(!dir.path().join("iteration_002.json").exists());
}

#[test]
fn plot_data_exports_strata() {
    let dir = TempDir::new().unwrap();
    paretoc(dir.path(), &["run", "--problem", "smale", "--grid", "30x30", "-o", "s.json"]);
    let o = paretoc(dir.path(), &["plot-data", "s.json", "--space", "output"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stable = fs::read_to_string(dir.path().join("s_critical_stable.csv")).unwrap();
    assert!(stable.starts_with("component_id,vertex_index,u1,u2,stratum\n"));
    assert!(dir.path().join("s_critical_unstable.csv").exists());

    let o = paretoc(dir.path(), &["plot-data", "s.json", "--stable-only", "--out-dir", "only"]);
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> =
        fs::read_dir(dir.path().join("only")).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert_eq!(names, vec!["s_critical_stable.csv".to_string()]);
    let stable = fs::read_to_string(dir.path().join("only/s_critical_stable.csv")).unwrap();
    assert!(stable.starts_with("component_id,vertex_index,x1,x2,u1,u2,stratum\n"));
}

#[test]
fn plot_data_of_empty_complex_warns_and_succeeds() {
    let dir = TempDir::new().unwrap();
    let empty = r#"{"version":1,"ambient_dim":2,"objectives":2,"vertices":[],"simplices":[],"markers":[],"provenance":{"problem":"none","grid":"","iterations":0}}"#;
    fs::write(dir.path().join("e.json"), empty).unwrap();
    let o = paretoc(dir.path(), &["plot-data", "e.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no simplices"));
    for s in ["singular_only", "critical_unstable", "critical_stable"] {
        assert_eq!(fs::read_to_string(dir.path().join(format!("e_{s}.csv"))).unwrap(), "");
    }
}

#[test]
fn list_and_check_derivatives() {
    let dir = TempDir::new().unwrap();
    let o = paretoc(dir.path(), &["list-problems"]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["triv", "smale", "sms", "noncv", "locglob", "zdt3reg", "tri_quadratic", "sphere_proj"] {
        assert!(stdout(&o).contains(name), "{name}");
    }
    let o = paretoc(dir.path(), &["check-derivatives", "--problem", "locglob"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["objectives"]["passed"], true);
    let o = paretoc(dir.path(), &["check-derivatives", "--problem", "sphere_proj"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["constraint"]["passed"], true);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["run", "--problem", "nope"],
        vec!["run", "--problem", "triv", "--grid", "40"],
        vec!["run", "--problem", "triv", "--grid", "4x4x4"],
        vec!["run", "--problem", "triv", "--grid", "subdiv:2"],
        vec!["run", "--problem", "sphere_proj", "--grid", "10x10"],
        vec!["run", "--problem", "triv", "--order", "3"],
        vec!["iterate", "--problem", "sphere_proj"],
        vec!["distance", "missing.json", "missing.json"],
        vec!["frobnicate"],
    ] {
        let o = paretoc(dir.path(), &args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    fs::write(dir.path().join("bad.json"), "{").unwrap();
    assert_eq!(paretoc(dir.path(), &["plot-data", "bad.json"]).status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let empty = r#"{"version":1,"ambient_dim":2,"objectives":2,"vertices":[],"simplices":[],"markers":[],"provenance":{"problem":"none","grid":"","iterations":0}}"#;
    fs::write(dir.path().join("e.json"), empty).unwrap();
    let o = paretoc(dir.path(), &["distance", "e.json", "e.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn threads_env_var_is_honoured() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_paretoc"))
        .args(["run", "--problem", "triv", "--grid", "10x10"])
        .current_dir(dir.path())
        .env("PARETOC_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "zero threads is rejected whether given by flag or env");
    let o = Command::new(env!("CARGO_BIN_EXE_paretoc"))
        .args(["run", "--problem", "triv", "--grid", "10x10"])
        .current_dir(dir.path())
        .env("PARETOC_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}
