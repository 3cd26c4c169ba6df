use std::path::Path;
use std::process::{Command, Output};

use compseq_cli::ingest::read_jsonl_str;
use serde_json::Value;

const CTW: &str = include_str!("fixtures/sample_ctw.txt");

fn compseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compseq")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn synth_gt(dir: &Path) -> String {
    let gt = path(dir, "gt.jsonl");
    stdout(&compseq(&["synth", "--seed", "5", "--count", "4", "--images", "2", "-o", &gt]));
    gt
}

#[test]
fn piou_of_identical_pair_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let gt = synth_gt(dir.path());
    let rec = &read_jsonl_str(&std::fs::read_to_string(&gt).unwrap()).unwrap()[0];
    let pairs = path(dir.path(), "pairs.jsonl");
    let inst = &rec.instances[0];
    std::fs::write(&pairs, compseq_cli::ingest::pair_to_line(inst, inst) + "\n").unwrap();
    for extra in [&[][..], &["--exact"][..]] {
        let mut args = vec!["piou", pairs.as_str()];
        args.extend_from_slice(extra);
        let out = compseq(&args);
        let v = json_lines(&stdout(&out));
        assert_eq!(v[0]["piou"], 1.0);
    }
    assert!(String::from_utf8_lossy(&compseq(&["piou", &pairs, "--seed", "42"]).stderr).contains("seed: 42"));
}

#[test]
fn eval_of_ground_truth_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let gt = synth_gt(dir.path());
    for backend in ["exact", "monte-carlo", "bbox"] {
        let v = json_lines(&stdout(&compseq(&["eval", "--pred", &gt, "--gt", &gt, "--backend", backend])));
        assert_eq!((v[0]["precision"].as_f64(), v[0]["recall"].as_f64()), (Some(1.0), Some(1.0)), "{backend}");
        assert_eq!(v[0]["f_measure"], 1.0);
    }
    let csv = stdout(&compseq(&["eval", "--pred", &gt, "--gt", &gt, "--report", "csv"]));
    assert_eq!(csv.lines().last().unwrap(), "ALL,8,0,0,0,1,1,1");
}

#[test]
fn decompose_then_assemble_reproduces_resampled_outline() {
    let dir = tempfile::tempdir().unwrap();
    let ctw = path(dir.path(), "img_7.txt");
    std::fs::write(&ctw, CTW).unwrap();
    let dec = stdout(&compseq(&["decompose", &ctw, "--format", "ctw1500", "--t", "6"]));
    let recs = read_jsonl_str(&dec).unwrap();
    assert_eq!(recs[0].image, "img_7");
    assert!(recs[0].instances.iter().all(|i| i.components.as_ref().unwrap().len() == 6));
    let dec_path = path(dir.path(), "dec.jsonl");
    std::fs::write(&dec_path, &dec).unwrap();
    let asm = read_jsonl_str(&stdout(&compseq(&["assemble", &dec_path]))).unwrap();
    let rect = asm[0].instances[0].polygon.vertices();
    assert_eq!(rect.len(), 14);
    // 60 x 10 rectangle: 7 equally spaced points per side.
    for (j, p) in rect[..7].iter().enumerate() {
        assert!((p.x - 10.0 * j as f64).abs() < 1e-6 && p.y.abs() < 1e-9, "{p:?}");
    }
}

#[test]
fn match_assigns_every_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let gt = synth_gt(dir.path());
    let pred = path(dir.path(), "pred.jsonl");
    stdout(&compseq(&["synth", "--seed", "5", "--count", "4", "--images", "2", "--noise", "1.5", "-o", &pred]));
    let v = json_lines(&stdout(&compseq(&["match", "--pred", &pred, "--gt", &gt])));
    assert_eq!(v.len(), 2);
    for img in &v {
        let gts: Vec<u64> = img["assignments"].as_array().unwrap().iter().map(|a| a["gt"].as_u64().unwrap()).collect();
        // Same seed, so prediction i is the jittered copy of instance i.
        assert_eq!(gts, vec![0, 1, 2, 3]);
    }
    let o = compseq(&["match", "--pred", &pred, "--gt", &gt, "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synth_is_deterministic_and_echoes_seed() {
    let a = compseq(&["synth", "--seed", "9", "--t", "6"]);
    let b = compseq(&["synth", "--seed", "9", "--t", "6"]);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(String::from_utf8_lossy(&a.stderr).contains("seed: 9"));
}

#[test]
fn interp_compare_reports_both_means() {
    let v = json_lines(&stdout(&compseq(&["interp-compare", "--count", "20"])));
    assert_eq!(v[0]["seed"], 7);
    assert_eq!(v[0]["curvature"], "high");
    assert!(v[0]["bspline_mean_piou"].as_f64().unwrap() > v[0]["bezier_mean_piou"].as_f64().unwrap());
    assert_eq!(v[0]["length_sweep_true_outline"].as_array().unwrap().len(), 3);
}

#[test]
fn grad_check_passes() {
    let v = json_lines(&stdout(&compseq(&["grad-check", "--points", "100", "--seed", "3"])));
    assert_eq!(v[0]["pass"], true);
    // An impossible tolerance is reported as an internal check failure.
    assert_eq!(compseq(&["grad-check", "--points", "10", "--tolerance", "0"]).status.code(), Some(2));
}

#[test]
fn render_emits_svg() {
    let dir = tempfile::tempdir().unwrap();
    let gt = synth_gt(dir.path());
    let svg = stdout(&compseq(&["render", &gt, "--select", "synth_5_1"]));
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polygon").count(), 4);
    assert_eq!(compseq(&["render", &gt]).status.code(), Some(1));
}

#[test]
fn usage_and_input_errors_exit_one() {
    let o = compseq(&["eval", "--unknown-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.jsonl");
    std::fs::write(&bad, "{\"image\":\"x\",\"instances\":[{\"polygon\":[[0,0]]}]}\n").unwrap();
    let o = compseq(&["decompose", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("instances[0].polygon"));
    assert_eq!(compseq(&["assemble", &path(dir.path(), "missing.jsonl")]).status.code(), Some(1));
}
