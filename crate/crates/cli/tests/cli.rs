use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spotmatch::assignment::Engine;
use spotmatch::batch::{bind_assign, BatchImage, BatchOutput};
use spotmatch::format::read_predictions;
use spotmatch::pipeline::{align_images, AssignRow, RunConfig};
use spotmatch_cli::{cmd_synth, correlation_points, CorrelationSource, SynthOptions};
use spotmatch::harness::SynthConfig;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn spotmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spotmatch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn golden_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.psa.text_cost = "disparity".into();
    cfg
}

#[test]
fn assign_matches_golden_bytes() {
    let out = spotmatch(&[
        "assign",
        "--teacher",
        p(&fixture("teacher.jsonl")),
        "--student",
        p(&fixture("student.jsonl")),
        "--text-cost",
        "disparity",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(out.stdout, fs::read(fixture("assign_golden.jsonl")).unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let opts = SynthOptions {
        scene: SynthConfig {
            seed: 3,
            emit_dists: true,
            ..SynthConfig::default()
        },
        n_images: 12,
    };
    let [_, t, s] = cmd_synth(&opts, dir.path()).unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_spotmatch"))
            .args(["assign", "--teacher", p(&t), "--student", p(&s)])
            .env("SPOTMATCH_THREADS", threads)
            .output()
            .unwrap()
    };
    let (one, four) = (run("1"), run("4"));
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(String::from_utf8(one.stdout).unwrap().lines().count(), 13);
}

#[test]
fn batch_interface_matches_golden() {
    let load = |n: &str| read_predictions(fs::File::open(fixture(n)).map(std::io::BufReader::new).unwrap()).unwrap();
    let (teachers, students) = (load("teacher.jsonl"), load("student.jsonl"));
    let golden = fs::read_to_string(fixture("assign_golden.jsonl")).unwrap();
    let rows: Vec<AssignRow> = golden
        .lines()
        .skip(1)
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let engine = Engine::default();
    for ((t, s), row) in align_images(&teachers, &students).unwrap().into_iter().zip(&rows) {
        let out = bind_assign(
            &engine,
            &BatchImage::from_prediction_set(t),
            &BatchImage::from_prediction_set(s),
            &golden_config(),
        )
        .unwrap();
        assert_eq!(out, BatchOutput::from(row), "image {}", row.image_id);
    }
}

#[test]
fn empty_instances_give_empty_rows() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("empty.jsonl");
    fs::write(
        &f,
        "{\"image_id\":\"x\",\"width\":10,\"height\":10,\"instances\":[]}\n{\"image_id\":\"y\",\"width\":10,\"height\":10,\"instances\":[]}\n",
    )
    .unwrap();
    let out = spotmatch(&["assign", "--teacher", p(&f), "--student", p(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<AssignRow> = text.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.pairs.is_empty() && r.det_only.is_empty() && r.e2e.is_empty() && r.dropped.is_empty()));
}

#[test]
fn corrupt_line_exits_2_naming_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.jsonl");
    let good = fs::read_to_string(fixture("teacher.jsonl")).unwrap();
    let first = good.lines().next().unwrap();
    fs::write(&f, format!("{first}\n{{\"image_id\": \"b\", \"width\": 10\n")).unwrap();
    let out = spotmatch(&["assign", "--teacher", p(&f), "--student", p(&fixture("student.jsonl"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // a polygon with an odd point count is a schema error too
    fs::write(
        &f,
        "{\"image_id\":\"a\",\"width\":10,\"height\":10,\"instances\":[{\"polygon\":[[0,0],[1,0],[1,1],[0,1],[0,0.5]],\"score\":0.5,\"transcription\":\"A\",\"char_conf\":[0.5]}]}\n",
    )
    .unwrap();
    let out = spotmatch(&["evaluate", "--pred", p(&f), "--gt", p(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn id_mismatch_exits_3() {
    let out = spotmatch(&[
        "assign",
        "--teacher",
        p(&fixture("teacher.jsonl")),
        "--student",
        p(&fixture("eval_gt.jsonl")),
        "--text-cost",
        "disparity",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = spotmatch(&["evaluate", "--pred", p(&fixture("teacher.jsonl")), "--gt", p(&fixture("eval_gt.jsonl"))]);
    assert_eq!(out.status.code(), Some(3));
}

fn report(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["header"]["fingerprint"].as_str().unwrap().len() == 64);
    v["report"].clone()
}

#[test]
fn evaluate_fixtures() {
    let gt = fixture("eval_gt.jsonl");
    let lex = fixture("lexicon.txt");
    let perfect = report(&spotmatch(&["evaluate", "--pred", p(&gt), "--gt", p(&gt), "--lexicon", p(&lex)]));
    for k in ["precision", "recall", "f1", "e2e_hmean_none", "e2e_hmean_full"] {
        assert_eq!(perfect[k], 1.0, "{k}");
    }
    let half = fixture("eval_half.jsonl");
    let r = report(&spotmatch(&["evaluate", "--pred", p(&half), "--gt", p(&gt), "--lexicon", p(&lex)]));
    let (none, full, f1) = (
        r["e2e_hmean_none"].as_f64().unwrap(),
        r["e2e_hmean_full"].as_f64().unwrap(),
        r["f1"].as_f64().unwrap(),
    );
    assert!(none < full && full <= f1, "{none} {full} {f1}");
    let r = report(&spotmatch(&["evaluate", "--pred", p(&half), "--gt", p(&gt)]));
    assert!(r["e2e_hmean_full"].is_null());
    assert_eq!(r["e2e_hmean_none"].as_f64().unwrap(), none);
}

#[test]
fn synth_is_seed_deterministic() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let run = |dir: &Path, seed: &str| {
        let out = spotmatch(&["synth", "--out", p(dir), "--seed", seed, "--images", "4"]);
        assert!(out.status.success());
    };
    run(a.path(), "42");
    run(b.path(), "42");
    run(c.path(), "43");
    for f in spotmatch_cli::SYNTH_FILES {
        let fa = fs::read(a.path().join(f)).unwrap();
        assert_eq!(fa, fs::read(b.path().join(f)).unwrap(), "{f}");
        assert_ne!(fa, fs::read(c.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn synth_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let opts = SynthOptions {
        scene: SynthConfig {
            seed: 9,
            emit_dists: true,
            ..SynthConfig::default()
        },
        n_images: 3,
    };
    let paths = cmd_synth(&opts, dir.path()).unwrap();
    let scenes = spotmatch::harness::synth_scenes(&opts.scene, 3).unwrap();
    let back = read_predictions(std::io::BufReader::new(fs::File::open(&paths[2]).unwrap())).unwrap();
    for (a, s) in back.iter().zip(&scenes) {
        for (x, y) in a.instances.iter().zip(&s.student.instances) {
            for (p, q) in x.polygon.points().iter().zip(y.polygon.points()) {
                assert!((p.x - q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-9);
            }
            assert_eq!(x.score, y.score);
            assert_eq!(x.transcription, y.transcription);
            assert_eq!(x.char_conf, y.char_conf);
            assert_eq!(x.char_dists, y.char_dists);
        }
    }
}

#[test]
fn correlate_needs_30_pairs() {
    let out = spotmatch(&["correlate", "--pairs", "29"]);
    assert_eq!(out.status.code(), Some(4));
    let out = spotmatch(&["correlate", "--pairs", "30", "--instances", "5"]);
    assert!(out.status.success());
}

#[test]
fn similarity_falls_with_jitter_level() {
    let mut last = f64::INFINITY;
    for sigma in [0.002, 0.005, 0.01, 0.02, 0.04] {
        let dir = tempfile::tempdir().unwrap();
        let opts = SynthOptions {
            scene: SynthConfig {
                seed: 42,
                n_instances: 25,
                jitter_sigma: sigma,
                ..SynthConfig::default()
            },
            n_images: 40,
        };
        let [_, teacher, student] = cmd_synth(&opts, dir.path()).unwrap();
        let points = correlation_points(&CorrelationSource::Files { teacher, student }).unwrap();
        let mean = points.iter().map(|p| p.similarity).sum::<f64>() / points.len() as f64;
        assert!(mean < last, "sigma {sigma}: {mean} !< {last}");
        last = mean;
    }
}
