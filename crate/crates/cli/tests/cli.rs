use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempdeg_core::synth::synthetic_clip;
use tempdeg_core::vio::{decode_png_frame, read_clip, write_clip, FrameRate};
use tempdeg_core::ClipShape;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn clip(&self, name: &str, seed: u64, shape: ClipShape) -> PathBuf {
        let path = self.path(name);
        write_clip(&synthetic_clip(seed, shape).unwrap(), &path, FrameRate::default()).unwrap();
        path
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_tempdeg"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }

    fn read(&self, name: &str) -> Vec<u8> {
        fs::read(self.path(name)).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_slice(&self.read(name)).unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn ok(out: Output) -> Output {
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn degrade(ws: &Workspace, output: &str, recipe: &str, extra: &[&str]) -> Output {
    let mut args = vec!["degrade", "-i", "clean.y4m", "-o", output, "-r", recipe];
    args.extend_from_slice(extra);
    ws.run(&args)
}

#[test]
fn degrade_then_replay_reproduces_bytes() {
    let ws = Workspace::new();
    ws.clip("clean.y4m", 1, ClipShape::new(9, 40, 56));
    let out = ok(degrade(&ws, "deg.y4m", "r.json", &["-p", "strong", "-s", "31"]));
    assert!(stdout(&out).contains("seed: 31"));
    ok(ws.run(&["replay", "-i", "clean.y4m", "-r", "r.json", "-o", "again.y4m"]));
    ok(ws.run(&["-j", "3", "replay", "-i", "clean.y4m", "-r", "r.json", "-o", "third.y4m"]));
    assert_eq!(ws.read("deg.y4m"), ws.read("again.y4m"));
    assert_eq!(ws.read("deg.y4m"), ws.read("third.y4m"));
    assert_eq!(ws.json("r.json")["preset"], "strong");
}

#[test]
fn reruns_write_identical_files() {
    let ws = Workspace::new();
    ws.clip("clean.y4m", 2, ClipShape::new(6, 24, 32));
    ok(ws.run(&["-j", "1", "degrade", "-i", "clean.y4m", "-o", "a", "-r", "a.json", "-p", "medium", "-s", "5"]));
    ok(degrade(&ws, "b", "b.json", &["-p", "medium", "-s", "5"]));
    for k in 0..6 {
        let name = tempdeg_core::vio::frame_file_name(k);
        assert_eq!(ws.read(&format!("a/{name}")), ws.read(&format!("b/{name}")));
    }
    assert_eq!(ws.read("a.json"), ws.read("b.json"));
}

#[test]
fn replay_on_another_shape_is_a_shape_error() {
    let ws = Workspace::new();
    ws.clip("clean.y4m", 3, ClipShape::new(5, 16, 20));
    ws.clip("other.y4m", 3, ClipShape::new(5, 16, 24));
    ok(degrade(&ws, "deg.y4m", "r.json", &["-p", "light", "-s", "1"]));
    let out = ws.run(&["replay", "-i", "other.y4m", "-r", "r.json", "-o", "x.y4m"]);
    assert_eq!(code(&out), 4);
    assert!(!ws.path("x.y4m").exists());
}

#[test]
fn exit_codes_follow_the_error_class() {
    let ws = Workspace::new();
    ws.clip("clean.y4m", 4, ClipShape::new(4, 12, 12));
    ws.clip("small.y4m", 4, ClipShape::new(4, 12, 10));
    assert_eq!(code(&ws.run(&["degrade", "-i", "clean.y4m", "-o", "o.y4m", "-r", "r.json", "-p", "extreme"])), 2);
    assert_eq!(code(&ws.run(&["degrade", "--bogus"])), 2);
    assert_eq!(code(&ws.run(&["degrade", "-o", "o.y4m", "-r", "r.json", "-p", "light", "-s", "1"])), 2);
    assert_eq!(code(&ws.run(&["degrade", "-i", "clean.y4m", "-o", "o.y4m", "-r", "r.json", "-p", "light"])), 2);
    assert_eq!(code(&ws.run(&["degrade", "-i", "absent.y4m", "-o", "o.y4m", "-r", "r.json", "-p", "light", "-s", "1"])), 3);
    assert_eq!(code(&ws.run(&["eval", "--reference", "clean.y4m", "--test", "small.y4m"])), 4);

    fs::write(ws.path("in.json"), "[{\"frame_index\": 0, \"box\": {\"x\": 0}}]").unwrap();
    fs::write(ws.path("out.json"), "[]").unwrap();
    let args = ["eval", "--reference", "clean.y4m", "--test", "clean.y4m", "--sidecar-in", "in.json", "--sidecar-out", "out.json"];
    assert_eq!(code(&ws.run(&args)), 5);

    fs::write(ws.path("bad.y4m"), b"YUV4MPEG2 W4 H4 F24:1 C420jpeg\nFRAME\n").unwrap();
    assert_eq!(code(&ws.run(&["degrade", "-i", "bad.y4m", "-o", "o.y4m", "-r", "r.json", "-p", "light", "-s", "1"])), 4);
}

#[test]
fn outputs_are_never_overwritten() {
    let ws = Workspace::new();
    ws.clip("clean.y4m", 5, ClipShape::new(4, 12, 12));
    fs::write(ws.path("taken.y4m"), b"keep me").unwrap();
    let out = degrade(&ws, "taken.y4m", "r.json", &["-p", "light", "-s", "2"]);
    assert_eq!(code(&out), 3);
    assert_eq!(ws.read("taken.y4m"), b"keep me");
}

#[test]
fn flags_override_the_config_file() {
    let ws = Workspace::new();
    ws.clip("clean.y4m", 6, ClipShape::new(5, 16, 16));
    fs::write(ws.path("cfg.json"), r#"{"preset": "light", "seed": 5, "output": "from_file.y4m", "recipe": "r.json"}"#).unwrap();
    let out = ok(ws.run(&["--config", "cfg.json", "degrade", "-i", "clean.y4m", "-s", "6"]));
    assert!(stdout(&out).contains("seed: 6"));
    let recipe = ws.json("r.json");
    assert_eq!(recipe["seed"], 6);
    assert_eq!(recipe["preset"], "light");
    assert!(ws.path("from_file.y4m").exists());

    fs::write(ws.path("typo.json"), r#"{"presett": "light"}"#).unwrap();
    assert_eq!(code(&ws.run(&["--config", "typo.json", "degrade", "-i", "clean.y4m"])), 2);
}

#[test]
fn self_evaluation_hits_the_caps() {
    let ws = Workspace::new();
    ws.clip("clean.y4m", 7, ClipShape::new(20, 24, 32));
    let side: Vec<Value> = [0usize, 7, 19]
        .iter()
        .map(|&f| serde_json::json!({"frame_index": f, "box": {"x": 2, "y": 3, "w": 10, "h": 8}, "scores": {"fiqa": 0.5}}))
        .collect();
    fs::write(ws.path("s.json"), serde_json::to_vec(&side).unwrap()).unwrap();
    let args = [
        "eval", "--reference", "clean.y4m", "--test", "clean.y4m", "--sidecar-in", "s.json", "--sidecar-out", "s.json",
        "--report", "report.json",
    ];
    ok(ws.run(&args));
    let report = ws.json("report.json");
    let metrics = report["metrics"].as_array().unwrap();
    assert_eq!(metrics[0]["metric"], "psnr");
    assert_eq!(metrics[0]["mean"], 99.0);
    assert!((metrics[1]["mean"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(report["sampled_frames"].as_array().unwrap().len(), 16);
    assert_eq!(report["crops"]["gains"]["fiqa"]["percent"], 0.0);
}

#[test]
fn preview_lays_out_two_rows_of_sixteen() {
    let ws = Workspace::new();
    let clean = ws.clip("clean.y4m", 8, ClipShape::new(49, 30, 40));
    ok(degrade(&ws, "deg.y4m", "r.json", &["-p", "strong", "-s", "3"]));
    let out = ok(ws.run(&["preview", "--reference", "clean.y4m", "--test", "deg.y4m", "-o", "sheet.png"]));
    assert!(stdout(&out).contains("16 frames"));
    let sheet = decode_png_frame(&ws.read("sheet.png")).unwrap();
    let indices = tempdeg_core::metrics::uniform_frame_indices(49, 16).unwrap();
    let clean = read_clip(&clean).unwrap();
    let degraded = read_clip(Path::new(&ws.path("deg.y4m"))).unwrap();
    let expected = tempdeg_cli::commands::contact_sheet(&clean, &degraded, &indices).unwrap();
    assert_eq!((sheet.width(), sheet.height()), (expected.width(), expected.height()));
    assert!(sheet.width() > 16 * 40 && sheet.height() > 2 * 30);
}

#[test]
fn bench_reports_identical_hashes() {
    let ws = Workspace::new();
    let args = [
        "bench", "--width", "64", "--height", "48", "--frames", "6", "--runs", "1", "--thread-counts", "1,2",
        "--report", "bench.json",
    ];
    let out = ok(ws.run(&args));
    assert!(stdout(&out).contains("frames/s"));
    let report = ws.json("bench.json");
    assert_eq!(report["deterministic"], true);
    assert_eq!(report["results"].as_array().unwrap().len(), 2);
}
