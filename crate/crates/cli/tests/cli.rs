use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neotrack"))
        .args(args)
        .env_remove("NEOTRACK_CONFIG")
        .env_remove("NEOTRACK_SYNTH_CONFIG")
        .output()
        .expect("spawn neotrack")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn simulate(dir: &Path, scenario: &str) -> (String, String, String) {
    let p = |f: &str| dir.join(f).display().to_string();
    ok(&[
        "simulate",
        "--scenario",
        &fixture(scenario).display().to_string(),
        "--out",
        &p("stream.jsonl"),
        "--truth",
        &p("truth.csv"),
        "--boxes",
        &p("boxes.csv"),
    ]);
    (p("stream.jsonl"), p("truth.csv"), p("boxes.csv"))
}

fn manifest_config(path: &Path) -> String {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v["config"].as_str().unwrap().to_string()
}

#[test]
fn track_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let (stream, _, _) = simulate(tmp.path(), "scenario_static.toml");
    let out = tmp.path().join("res");
    ok(&["track", "--input", &stream, "--out", out.to_str().unwrap(), "--set", "track_box_size=100"]);
    for class in ["BMR", "SP", "HRS"] {
        let got = fs::read_to_string(out.join("static").join(format!("track_{class}.csv"))).unwrap();
        let want = fs::read_to_string(fixture(&format!("golden/track_{class}.csv"))).unwrap();
        assert_eq!(got, want, "{class}");
        assert!(out.join("static").join(format!("stages_{class}.csv")).exists());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest_track.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 6);
}

#[test]
fn missing_input_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("res");
    let r = run(&["track", "--input", tmp.path().join("nope.jsonl").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn help_and_usage() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["track", "--help"]).status.code(), Some(0));
    assert_eq!(run(&["track"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn bad_set_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (stream, _, _) = simulate(tmp.path(), "scenario_static.toml");
    let out = tmp.path().join("res");
    let r = run(&["track", "--input", &stream, "--out", out.to_str().unwrap(), "--set", "n_f1=banana"]);
    assert_ne!(r.status.code(), Some(0));
    assert!(!out.exists());
    let r = run(&["track", "--input", &stream, "--out", out.to_str().unwrap(), "--set", "no_such_key=1"]);
    assert_ne!(r.status.code(), Some(0));
}

#[test]
fn config_layers_apply_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let (stream, _, _) = simulate(tmp.path(), "scenario_static.toml");
    let file = tmp.path().join("cfg.toml");
    fs::write(&file, "n_f1 = 7\nt_peak = 150\n").unwrap();
    let env_file = tmp.path().join("env.toml");
    fs::write(&env_file, "n_f2 = 12\n").unwrap();

    let out = tmp.path().join("a");
    ok(&[
        "track", "--input", &stream, "--out", out.to_str().unwrap(), "--config", file.to_str().unwrap(), "--set",
        "t_peak=90",
    ]);
    let cfg = manifest_config(&out.join("manifest_track.json"));
    assert!(cfg.contains("n_f1 = 7\n"), "{cfg}");
    assert!(cfg.contains("t_peak = 90\n"), "{cfg}");
    assert!(cfg.contains("n_f2 = 40\n"), "{cfg}");

    let out = tmp.path().join("b");
    let r = Command::new(env!("CARGO_BIN_EXE_neotrack"))
        .args(["track", "--input", &stream, "--out", out.to_str().unwrap()])
        .env("NEOTRACK_CONFIG", &env_file)
        .output()
        .unwrap();
    assert!(r.status.success());
    let cfg = manifest_config(&out.join("manifest_track.json"));
    assert!(cfg.contains("n_f2 = 12\n") && cfg.contains("n_f1 = 5\n"), "{cfg}");
}

#[test]
fn eval_rejects_mismatched_episodes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    let (stream, _, _) = simulate(&a, "scenario_static.toml");
    let (_, truth, boxes) = simulate(&b, "scenario_report.toml");
    let res = tmp.path().join("res");
    ok(&["track", "--input", &stream, "--out", res.to_str().unwrap()]);
    ok(&["hcp", "--input", &stream, "--out", res.to_str().unwrap()]);
    let report = tmp.path().join("report");
    let r = run(&[
        "eval", "--results", res.to_str().unwrap(), "--annotations", &truth, "--truth-boxes", &boxes, "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("static") && err.contains("report"), "{err}");
    assert!(!report.exists());
}

#[test]
fn plot_of_empty_stream() {
    let tmp = tempfile::tempdir().unwrap();
    let stream = tmp.path().join("empty.jsonl");
    fs::write(&stream, "").unwrap();
    let svg = tmp.path().join("plots/empty.svg");
    ok(&["plot", "--input", stream.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("id=\"axes\""));
    assert!(!text.contains("<polyline"));
    assert!(tmp.path().join("plots/empty.svg.manifest.json").exists());
}

#[test]
fn plot_draws_four_stages() {
    let tmp = tempfile::tempdir().unwrap();
    let (stream, _, _) = simulate(tmp.path(), "scenario_noisy.toml");
    let svg = tmp.path().join("bmr.svg");
    ok(&["plot", "--input", &stream, "--out", svg.to_str().unwrap(), "--class", "BMR", "--axis", "y"]);
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("class=\"trace\"").count(), 4);
}

#[test]
fn simulate_rejects_duplicate_episodes() {
    let tmp = tempfile::tempdir().unwrap();
    let s = fixture("scenario_static.toml").display().to_string();
    let out = tmp.path().join("s.jsonl");
    let truth = tmp.path().join("t.csv");
    let r = run(&["simulate", "--scenario", &s, "--scenario", &s, "--out", out.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    assert_ne!(r.status.code(), Some(0));
    assert!(!out.exists() && !truth.exists());
}
