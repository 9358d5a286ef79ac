use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fiberseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiberseg")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    assert_eq!(text.trim().lines().count(), 1, "{text}");
    serde_json::from_str(text.trim()).expect("one JSON line")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"{
  "model": { "box_edge": 160.0, "mean_length": 50.0, "length_stddev": 10.0, "target_fraction": 0.04 },
  "grid": { "dims": [40, 40, 40], "voxel_size_um": 4.0 }
}"#;

#[test]
fn generate_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = fiberseg(&["generate", "--config", &config("full2mm.json"), "--seed", "7", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv_a = std::fs::read(a.join("fibers.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.join("fibers.csv")).unwrap());
    assert!(csv_a.starts_with(b"id,x0,y0,z0,x1,y1,z1,radius_um\n"));
    assert_eq!(std::fs::read(a.join("model.stl")).unwrap(), std::fs::read(b.join("model.stl")).unwrap());
    let stats: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["theta_histogram"]["counts"].as_array().unwrap().len(), 18);
    assert_eq!(stats["phi_histogram"]["counts"].as_array().unwrap().len(), 36);

    let other = dir.path().join("c");
    fiberseg(&["generate", "--config", &config("full2mm.json"), "--seed", "8", "--out", s(&other)]);
    assert_ne!(csv_a, std::fs::read(other.join("fibers.csv")).unwrap());
}

#[test]
fn desk_pipeline_reports_dice() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = fiberseg(&["pipeline", "--config", &config("desk128.json"), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("metrics.json")).unwrap()).unwrap();
    let dice = report["dice"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&dice));
    for key in ["ari", "tp", "fp", "fn", "n", "ignore_background"] {
        assert!(report.get(key).is_some(), "{key}");
    }
    let stdout: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stdout, report);
}

#[test]
fn stages_resume_from_disk_and_match_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let c = s(&cfg);
    let whole = dir.path().join("whole");
    assert!(fiberseg(&["pipeline", "--config", c, "--seed", "3", "--out", s(&whole)]).status.success());

    let d = dir.path().join("steps");
    let run = |args: &[&str]| {
        let mut all = vec!["--config", c, "--seed", "3"];
        all.extend_from_slice(args);
        let o = fiberseg(&all);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        o
    };
    run(&["generate", "--out", s(&d)]);
    run(&["rasterize", "--fibers", s(&d.join("fibers.csv")), "--out", s(&d)]);
    run(&["degrade", "--input", s(&d.join("attenuation")), "--output", s(&d.join("degraded"))]);
    run(&["segment", "--input", s(&d.join("degraded")), "--out", s(&d), "--orientation"]);
    let o = run(&["evaluate", "--truth", s(&d.join("gt")), "--pred", s(&d.join("instances"))]);
    let stepwise: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let whole_report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(whole.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(stepwise, whole_report);
    for suffix in ["ox", "oy", "oz", "valid"] {
        assert!(d.join(format!("orientation.{suffix}.json")).exists());
    }
    let mask_eval = run(&["evaluate", "--truth", s(&d.join("gt")), "--pred", s(&d.join("mask"))]);
    let mask_report: serde_json::Value = serde_json::from_slice(&mask_eval.stdout).unwrap();
    assert_eq!(mask_report["dice"], stepwise["dice"]);

    let stats = run(&["stats", "--labels", s(&d.join("gt"))]);
    let stats: serde_json::Value = serde_json::from_slice(&stats.stdout).unwrap();
    assert!(stats["object_count"].as_u64().unwrap() > 0);
}

#[test]
fn evaluate_mismatched_grids_names_both_dims() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (stem, dims) in [(&a, "[40, 40, 40]"), (&b, "[48, 40, 40]")] {
        let cfg = SMALL.replace("[40, 40, 40]", dims);
        let cfg_path = write_config(dir.path(), &cfg);
        let out = stem.with_extension("d");
        let o = fiberseg(&["pipeline", "--config", s(&cfg_path), "--out", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::rename(out.join("gt.json"), stem.with_extension("json")).unwrap();
        std::fs::rename(out.join("gt.raw"), stem.with_extension("raw")).unwrap();
    }
    let o = fiberseg(&["evaluate", "--truth", s(&a), "--pred", s(&b)]);
    assert!(!o.status.success());
    let err = stderr_json(&o);
    assert_eq!(err["stage"], "evaluate");
    let msg = err["error"].as_str().unwrap();
    assert!(msg.contains("[40, 40, 40]") && msg.contains("[48, 40, 40]"), "{msg}");
}

#[test]
fn unknown_config_key_fails_in_config_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"model": {"radius": 6.5}, "grdi": {}}"#);
    let out = dir.path().join("out");
    let o = fiberseg(&["generate", "--config", s(&cfg), "--out", s(&out)]);
    assert!(!o.status.success());
    let err = stderr_json(&o);
    assert_eq!(err["stage"], "config");
    assert!(err["error"].as_str().unwrap().contains("grdi"));
    assert!(!out.exists());
}

#[test]
fn failed_pipeline_removes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // The grid covers only half the box, so rasterization fails after generation.
    let cfg = write_config(dir.path(), &SMALL.replace("[40, 40, 40]", "[20, 20, 20]"));
    let out = dir.path().join("run");
    let o = fiberseg(&["pipeline", "--config", s(&cfg), "--out", s(&out)]);
    assert!(!o.status.success());
    assert_eq!(stderr_json(&o)["stage"], "rasterize");
    let left: Vec<_> = std::fs::read_dir(&out).unwrap().collect();
    assert!(left.is_empty(), "{left:?}");
}

#[test]
fn fbp_and_annotate_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SMALL.replace("\"grid\"", "\"fbp\": { \"n_angles\": 60 }, \"grid\""),
    );
    let c = s(&cfg);
    let d = dir.path();
    assert!(fiberseg(&["generate", "--config", c, "--out", s(d)]).status.success());
    assert!(fiberseg(&["rasterize", "--config", c, "--fibers", s(&d.join("fibers.csv")), "--out", s(d)]).status.success());
    let o = fiberseg(&[
        "fbp", "--config", c, "--input", s(&d.join("attenuation")), "--output", s(&d.join("recon")),
        "--sinogram-slice", "20",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("recon.json").exists() && d.join("recon.sino.raw").exists());

    let ann = d.join("ann.json");
    std::fs::write(&ann, r#"[{"id": 1, "points": [[0, 0, 0], [5, 5, 5]]}]"#).unwrap();
    let o = fiberseg(&[
        "annotate", "--config", c, "--annotations", s(&ann), "--gray", s(&d.join("attenuation")),
        "--output", s(&d.join("annotated")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary["labeled_voxels"].as_u64().unwrap() >= 6);

    std::fs::write(&ann, r#"[{"id": 1, "points": [[0, 0, 0], [50, 5, 5]]}]"#).unwrap();
    let o = fiberseg(&[
        "annotate", "--config", c, "--annotations", s(&ann), "--gray", s(&d.join("attenuation")),
        "--output", s(&d.join("bad")),
    ]);
    assert!(!o.status.success());
    assert_eq!(stderr_json(&o)["stage"], "annotate");
    assert!(!d.join("bad.json").exists());
}

#[test]
fn version_lists_formats() {
    let o = fiberseg(&["--version"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains(env!("CARGO_PKG_VERSION")) && text.contains("volume format"));
}
