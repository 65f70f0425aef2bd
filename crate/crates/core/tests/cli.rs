mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{FIG1_A2S, FIG1_TAST};
use intermo::cli::{run_with, EXIT_INVALID, EXIT_IO, EXIT_OK, EXIT_USAGE};
use intermo::dialect::project;
use intermo::midi::{write_smf, MidiNote, MidiPerformance, PedalStream};
use intermo::text::{parse, render};
use intermo::Dialect;
use serde_json::Value;
use tempfile::TempDir;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intermo"))
        .args(args)
        .env_remove("INTERMO_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn validate_golden_reports_nothing() {
    let o = bin(&["validate", &data("fig1_a2s.itm"), "--dialect", "a2s", "--json"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert_eq!(stdout(&o).trim(), r#"{"errors":[],"warnings":[]}"#);

    let o = bin(&["validate", &data("fig1_tast.itm"), "--dialect", "TAST"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert_eq!(stdout(&o).trim(), "ok");
}

#[test]
fn validate_flags_broken_measure() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.itm", &FIG1_A2S.replacen("1/4 PL", "1/2 PL", 1));
    let o = bin(&["validate", &f, "--dialect", "a2s", "--json"]);
    assert_eq!(o.status.code(), Some(EXIT_INVALID));
    let v = json(&o);
    let rules: Vec<&str> = v["errors"].as_array().unwrap().iter().map(|d| d["rule"].as_str().unwrap()).collect();
    assert_eq!(rules, ["M1"]);
}

#[test]
fn exit_codes() {
    let o = bin(&["validate", "/nonexistent/x.itm", "--dialect", "a2s"]);
    assert_eq!(o.status.code(), Some(EXIT_IO));
    let o = bin(&["validate", &data("fig1_a2s.itm"), "--dialect", "nope"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    let o = bin(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    // spelled text read as a lite dialect
    let o = bin(&["project", &data("fig1_a2s.itm"), "--from", "a2s-lite", "--to", "dbd"]);
    assert_eq!(o.status.code(), Some(EXIT_INVALID));
    // a score without stamps cannot reach a beat dialect
    let o = bin(&["project", &data("fig1_a2s.itm"), "--from", "a2s", "--to", "dbd"]);
    assert_eq!(o.status.code(), Some(EXIT_INVALID));
    assert!(!o.stderr.is_empty());
}

#[test]
fn projection_matches_library() {
    let doc = parse(FIG1_TAST, Dialect::Tast).unwrap();
    for (flag, d) in [
        ("a2s", Dialect::A2s),
        ("A2S_lite", Dialect::A2sLite),
        ("tast-lite", Dialect::TastLite),
        ("amt_lite", Dialect::AmtLite),
        ("dbd_plus", Dialect::DbdPlus),
        ("dbd", Dialect::Dbd),
    ] {
        let o = bin(&["project", &data("fig1_tast.itm"), "--from", "tast", "--to", flag]);
        assert_eq!(o.status.code(), Some(EXIT_OK), "{flag}");
        assert_eq!(stdout(&o).trim_end(), render(&project(&doc, d).unwrap()), "{flag}");
    }
}

#[test]
fn in_process_and_binary_agree() {
    let args = ["project", &data("fig1_tast.itm"), "--from", "tast", "--to", "a2s"].map(String::from);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with(std::iter::once("intermo".to_string()).chain(args.iter().cloned()), &mut out, &mut err);
    let o = bin(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(Some(code), o.status.code());
    assert_eq!(out, o.stdout);
    assert_eq!(String::from_utf8(out).unwrap().trim_end(), FIG1_A2S);
}

#[test]
fn json_and_text_round_trip() {
    let dir = TempDir::new().unwrap();
    let j = dir.path().join("fig1.json").display().to_string();
    let o = bin(&["convert", "intermo2json", &data("fig1_tast.itm"), "--dialect", "tast", "-o", &j]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert_eq!(fs::read_to_string(&j).unwrap().trim_end(), fs::read_to_string(data("fig1_tast.json")).unwrap().trim_end());
    let o = bin(&["convert", "json2intermo", &j]);
    assert_eq!(stdout(&o).trim_end(), FIG1_TAST);
}

#[test]
fn long_document_needs_long_form() {
    let o = bin(&["convert", "json2intermo", &data("long_tast.json")]);
    assert_eq!(o.status.code(), Some(EXIT_INVALID));
    let o = bin(&["--long-form", "convert", "json2intermo", &data("long_tast.json")]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
}

#[test]
fn beats_of_identical_files_score_one() {
    let f = data("fig1_tast.itm");
    let o = bin(&["--json", "eval", "beats", &f, &f, "--dialect", "tast"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let v = json(&o);
    assert_eq!(v["beat"]["f1"], 1.0);
    assert_eq!(v["downbeat"]["f1"], 1.0);
    assert_eq!(v["downbeat"]["n_ref"], 2);
}

#[test]
fn ned_across_dialects() {
    let dir = TempDir::new().unwrap();
    let lite = write(&dir, "lite.itm", &render(&project(&parse(FIG1_TAST, Dialect::Tast).unwrap(), Dialect::A2s).unwrap()));
    let o = bin(&["--json", "eval", "ned", &data("fig1_tast.itm"), &lite, "--dialect", "tast", "--pred-dialect", "a2s"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert_eq!(json(&o)["ned"], 0.0);
    let o = bin(&["--json", "eval", "ned", &data("fig1_a2s.itm"), &write(&dir, "short.itm", "|3/4k-4 PR: C5 3/4 c5"), "--dialect", "a2s"]);
    let ned = json(&o)["ned"].as_f64().unwrap();
    assert!(ned > 0.0 && ned < 1.0);
}

fn pedal_file(dir: &TempDir) -> String {
    let note = MidiNote::new(72, 0.20, 1.61, 46).unwrap();
    let perf = MidiPerformance::new(vec![note], PedalStream::from_pairs(&[(0.10, 127), (1.70, 0)])).unwrap();
    let p = dir.path().join("pedal.mid");
    fs::write(&p, write_smf(&perf)).unwrap();
    p.display().to_string()
}

#[test]
fn midi_pedal_conventions() {
    let dir = TempDir::new().unwrap();
    let mid = pedal_file(&dir);
    let key = bin(&["convert", "midi2amt", &mid, "--lite"]);
    let ped = bin(&["convert", "midi2amt", &mid, "--lite", "--pedoff"]);
    assert_eq!(stdout(&key).trim_end(), "C5 [0.20] c5 [1.61]");
    assert_eq!(stdout(&ped).trim_end(), "C5 [0.20] c5 [1.70]");
    let full = bin(&["convert", "midi2amt", &mid]);
    let text = stdout(&full);
    assert!(text.contains("vel:46") && text.contains("CC64:on") && text.contains("CC64:off"), "{text}");
}

#[test]
fn amt_midi_round_trip() {
    let dir = TempDir::new().unwrap();
    let mid = pedal_file(&dir);
    let amt = dir.path().join("p.itm").display().to_string();
    assert!(bin(&["convert", "midi2amt", &mid, "-o", &amt]).status.success());
    let back = dir.path().join("back.mid").display().to_string();
    assert!(bin(&["convert", "amt2midi", &amt, "-o", &back]).status.success());
    let o = bin(&["--json", "eval", "notes", &mid, &back, "--mode", "pedoff"]);
    assert_eq!(json(&o)["f1"], 1.0);
    let o = bin(&["--json", "eval", "notes", &amt, &back, "--mode", "velocity"]);
    assert_eq!(json(&o)["f1"], 1.0);
}

#[test]
fn seed_env_makes_sampling_reproducible() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_intermo"));
        c.args(["--json", "util", "tile", "5", "--count", "6"]).args(extra);
        match env {
            Some(s) => c.env("INTERMO_SEED", s),
            None => c.env_remove("INTERMO_SEED"),
        };
        stdout(&c.output().unwrap())
    };
    assert_eq!(run(Some("7"), &[]), run(Some("7"), &[]));
    assert_ne!(run(Some("7"), &[]), run(Some("8"), &[]));
    assert_eq!(run(Some("8"), &["--seed", "7"]), run(Some("7"), &[]));
    assert_eq!(run(None, &[]), run(Some("0"), &[]));
}

#[test]
fn tokenizer_commands() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "corpus.itm", &format!("{FIG1_A2S}\n"));
    let model = dir.path().join("model.json").display().to_string();
    let o = bin(&["--json", "tok", "train", &corpus, &data("fig1_tast.itm"), "--target", "40", "-o", &model]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&o)["pieces"].as_u64().unwrap() > 0);
    let ids = bin(&["tok", "encode", &corpus, "--model", &model]);
    let ids_file = write(&dir, "ids.txt", &stdout(&ids));
    let back = bin(&["tok", "decode", &ids_file, "--model", &model]);
    assert_eq!(stdout(&back).trim_end(), FIG1_A2S);
    let sampled = bin(&["tok", "sample", &corpus, "--model", &model, "--alpha", "0.5", "--seed", "3"]);
    let again = bin(&["tok", "sample", &corpus, "--model", &model, "--alpha", "0.5", "--seed", "3"]);
    assert_eq!(sampled.stdout, again.stdout);
    let sampled_file = write(&dir, "sampled.txt", &stdout(&sampled));
    assert_eq!(stdout(&bin(&["tok", "decode", &sampled_file, "--model", &model])).trim_end(), FIG1_A2S);
    let bad = bin(&["tok", "sample", &corpus, "--model", &model, "--alpha", "0"]);
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}

#[test]
fn smoothing_and_weight_utilities() {
    let o = bin(&["--json", "util", "smooth", "100"]);
    let v = json(&o);
    let support = v["support"].as_array().unwrap();
    assert_eq!(support.len(), 11);
    let total: f64 = support.iter().map(|b| b["q"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let o = bin(&["--json", "util", "smooth", "0"]);
    assert_eq!(json(&o)["support"].as_array().unwrap().len(), 6);
    let o = bin(&["util", "smooth", "4001"]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    let short = json(&bin(&["--json", "util", "weight", "10"]))["weight"].as_f64().unwrap();
    let long = json(&bin(&["--json", "util", "weight", "1000"]))["weight"].as_f64().unwrap();
    assert!(short > long);
}

#[test]
fn retrieval_over_a_directory() {
    let dir = TempDir::new().unwrap();
    let a = "|2/4k0 PR: C5 1/4 c5 D5 1/4 d5 E5 |2/4k0 e5 F5 1/4 f5 G5 1/4 g5";
    let b = "|3/4k2 PL: D3 1/4 d3 A3 1/4 a3 F#3 1/4 f#3 |3/4k2 D3 3/4 d3";
    let rows = [("a1", a, "w1", "p1"), ("a2", a, "w1", "p2"), ("b1", b, "w2", "p1"), ("b2", b, "w2", "p2"), ("solo", "|1/4k0 PR: B4 1/4 b4", "w3", "p1")];
    let mut labels = String::from("id,work,performer\n");
    for (id, text, work, perf) in rows {
        write(&dir, &format!("{id}.itm"), text);
        labels += &format!("{id},{work},{perf}\n");
    }
    let labels = write(&dir, "labels.csv", &labels);
    let o = bin(&["--json", "eval", "map", "--labels", &labels, "--dir", dir.path().to_str().unwrap(), "--dialect", "a2s", "--n", "2", "4"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    for r in v.as_array().unwrap() {
        assert_eq!(r["map"], 1.0);
        assert_eq!(r["n_queries"], 4);
        assert_eq!(r["excluded"][0], "solo");
    }
    assert!(String::from_utf8_lossy(&o.stderr).contains("solo"));
}

#[test]
fn split_writes_numbered_chunks() {
    let dir = TempDir::new().unwrap();
    let long = dir.path().join("long.itm").display().to_string();
    assert!(bin(&["--long-form", "convert", "json2intermo", &data("long_tast.json"), "-o", &long]).status.success());
    let out = dir.path().join("chunks");
    let o = bin(&["--json", "--long-form", "split", &long, "--dialect", "tast", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let listed = json(&o)["chunks"].as_array().unwrap().len();
    assert!(listed >= 3);
    for k in 0..listed {
        assert!(out.join(format!("long.{k:03}.itm")).exists());
    }
}
