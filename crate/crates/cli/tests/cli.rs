use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use moistkit::features::Family;

fn moistkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moistkit"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = moistkit(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Scenario with 10 images per class, extracted with `family`.
fn prepared(family: &str) -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--out", "data", "--shift", "mild", "--per-class", "10", "--seed", "3"]);
    for domain in ["source", "target"] {
        ok(d, &[
            "extract", "--images", &format!("data/{domain}"), "--labels", &format!("data/{domain}/labels.csv"),
            "--family", family, "--out", &format!("{domain}.csv"),
        ]);
    }
    tmp
}

/// Three tight, far-apart clusters in Haralick feature space.
fn separable_csv(path: &Path, labeled: bool) {
    let mut text = format!("id,domain,label,{}\n", Family::Haralick.names().join(","));
    for (c, class) in ["Dry", "Medium", "Wet"].iter().enumerate() {
        for i in 0..12 {
            let label = if labeled { class } else { &"" };
            let cells: Vec<String> = (0..13).map(|k| (100.0 * c as f64 + 0.01 * ((i * 7 + k) % 5) as f64).to_string()).collect();
            text += &format!("x{c}_{i},source,{label},{}\n", cells.join(","));
        }
    }
    fs::write(path, text).unwrap();
}

#[test]
fn synth_writes_both_domains() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(tmp.path(), &["synth", "--out", "s", "--per-class", "20", "--shift", "strong"]);
    assert!(stdout.contains("60 source"));
    let mut pngs = 0;
    for domain in ["source", "target"] {
        let dir = tmp.path().join("s").join(domain);
        pngs += fs::read_dir(&dir).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "png").count();
        let labels = fs::read_to_string(dir.join("labels.csv")).unwrap();
        assert_eq!(labels.lines().count(), 61);
    }
    assert_eq!(pngs, 120);
}

#[test]
fn usage_and_argument_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = moistkit(d, &["synth", "--shift", "none"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(code(&moistkit(d, &["synth", "--out", "x", "--shift", "extreme"])), 2);
    assert_eq!(code(&moistkit(d, &["synth", "--out", "x", "--per-class", "3"])), 2);
    assert_eq!(code(&moistkit(d, &["frobnicate"])), 2);
}

#[test]
fn synth_into_a_file_path_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("taken"), "x").unwrap();
    assert_eq!(code(&moistkit(tmp.path(), &["synth", "--out", "taken/sub"])), 3);
}

#[test]
fn extract_column_counts_and_order() {
    let tmp = prepared("combined");
    let d = tmp.path();
    let csv = fs::read_to_string(d.join("source.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 3 + 63);
    assert_eq!(&header[3..], Family::Combined.names().as_slice());
    let labels = fs::read_to_string(d.join("data/source/labels.csv")).unwrap();
    let ids: Vec<&str> = labels.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let rows: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, rows);

    ok(d, &["extract", "--images", "data/source", "--labels", "data/source/labels.csv", "--family", "haralick", "--out", "h.csv"]);
    let h = fs::read_to_string(d.join("h.csv")).unwrap();
    assert_eq!(h.lines().next().unwrap().split(',').count(), 3 + 13);
}

#[test]
fn extract_names_the_unreadable_image() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--out", "data", "--per-class", "10"]);
    fs::write(d.join("data/source/img_wet_004.png"), b"not a png").unwrap();
    let out = moistkit(d, &["extract", "--images", "data/source", "--labels", "data/source/labels.csv", "--family", "fos", "--out", "f.csv"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("img_wet_004.png"));
    assert_eq!(code(&moistkit(d, &["extract", "--images", "data/source", "--labels", "data/source/labels.csv", "--family", "wavelet", "--out", "f.csv"])), 2);
}

#[test]
fn baseline_on_separable_features() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    separable_csv(&d.join("sep.csv"), true);
    let stdout = ok(d, &["baseline", "--features", "sep.csv", "--model", "knn", "--folds", "4", "--report", "cv.json"]);
    assert!(stdout.contains("Accuracy   1.000 (0.000)"), "{stdout}");
    let report = json(&d.join("cv.json"));
    assert_eq!(report["perFold"].as_array().unwrap().len(), 4);
    assert_eq!(report["model"], "knn");
    assert_eq!(report["mean"]["accuracy"], 1.0);

    assert_eq!(code(&moistkit(d, &["baseline", "--features", "sep.csv", "--model", "svm", "--report", "x.json"])), 2);
    separable_csv(&d.join("unlabeled.csv"), false);
    assert_eq!(code(&moistkit(d, &["baseline", "--features", "unlabeled.csv", "--model", "gnb", "--report", "x.json"])), 2);
    assert_eq!(code(&moistkit(d, &["baseline", "--features", "missing.csv", "--model", "gnb", "--report", "x.json"])), 3);
}

#[test]
fn malformed_feature_files_are_argument_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    separable_csv(&d.join("sep.csv"), true);
    let text = fs::read_to_string(d.join("sep.csv")).unwrap();
    let cases = [
        ("renamed.csv", text.replacen("Haralick_ASM", "Haralick_Asm", 1)),
        ("nonfinite.csv", text.replacen(",0,", ",NaN,", 1)),
        ("word.csv", text.replacen(",0,", ",zero,", 1)),
        ("badlabel.csv", text.replacen(",Dry,", ",Soaked,", 1)),
        ("ragged.csv", format!("{text}extra,source,Dry,1\n")),
    ];
    for (name, body) in cases {
        assert_ne!(body, text, "{name} did not change");
        fs::write(d.join(name), body).unwrap();
        let out = moistkit(d, &["baseline", "--features", name, "--model", "gnb", "--report", "x.json"]);
        assert_eq!(code(&out), 2, "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn adapt_eval_predict_round_trip() {
    let tmp = prepared("haralick");
    let d = tmp.path();
    let stdout = ok(d, &["adapt", "--source", "source.csv", "--target", "target.csv", "--model-out", "m.json", "--report", "r.json"]);
    assert_eq!(stdout.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 30);

    let report = json(&d.join("r.json"));
    let cfg = &report["config"];
    assert_eq!((cfg["epochs"].as_u64(), cfg["batchSize"].as_u64(), cfg["warmupEpochs"].as_u64(), cfg["clusters"].as_u64()), (Some(30), Some(2), Some(15), Some(3)));
    assert_eq!(cfg["lambda"], 0.5);
    assert!(report["bestEpoch"].as_u64().unwrap() > 15);
    let model = json(&d.join("m.json"));
    for key in ["schema", "lambda", "F", "G", "D"] {
        assert!(model.get(key).is_some(), "model JSON lacks {key}");
    }

    ok(d, &["eval", "--model", "m.json", "--features", "source.csv", "--report", "e.json"]);
    let eval = json(&d.join("e.json"));
    assert!(eval["metrics"]["accuracy"].as_f64().unwrap() >= 0.34);
    let counts = eval["confusion"]["counts"].as_array().unwrap();
    assert_eq!(counts.iter().flat_map(|r| r.as_array().unwrap()).map(|c| c.as_u64().unwrap()).sum::<u64>(), 30);

    ok(d, &["predict", "--model", "m.json", "--features", "target.csv", "--out", "p.csv"]);
    let pred = fs::read_to_string(d.join("p.csv")).unwrap();
    let mut lines = pred.lines();
    assert_eq!(lines.next().unwrap(), "id,predicted,probDry,probMedium,probWet");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 30);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert!(["Dry", "Medium", "Wet"].contains(&cells[1]));
        let sum: f64 = cells[2..].iter().map(|c| c.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-6, "{row}");
    }
}

#[test]
fn schema_mismatches_exit_2() {
    let tmp = prepared("haralick");
    let d = tmp.path();
    ok(d, &["extract", "--images", "data/target", "--labels", "data/target/labels.csv", "--family", "fos", "--out", "fos.csv"]);
    let adapt = |target: &str| moistkit(d, &["adapt", "--source", "source.csv", "--target", target, "--epochs", "4", "--warmup", "1", "--model-out", "m.json", "--report", "r.json"]);
    assert_eq!(code(&adapt("fos.csv")), 2);
    assert_eq!(code(&adapt("target.csv")), 0);
    assert_eq!(code(&moistkit(d, &["eval", "--model", "m.json", "--features", "fos.csv", "--report", "e.json"])), 2);
    assert_eq!(code(&moistkit(d, &["predict", "--model", "m.json", "--features", "fos.csv", "--out", "p.csv"])), 2);
    // eval needs labels
    let unlabeled = fs::read_to_string(d.join("target.csv")).unwrap().replace(",target,Dry,", ",target,,");
    fs::write(d.join("unl.csv"), unlabeled).unwrap();
    assert_eq!(code(&moistkit(d, &["eval", "--model", "m.json", "--features", "unl.csv", "--report", "e.json"])), 2);
    ok(d, &["predict", "--model", "m.json", "--features", "unl.csv", "--out", "p.csv"]);
    // a corrupt model file is an argument error, a missing one an I/O error
    fs::write(d.join("bad.json"), "{\"schema\": 1}").unwrap();
    assert_eq!(code(&moistkit(d, &["predict", "--model", "bad.json", "--features", "target.csv", "--out", "p.csv"])), 2);
    assert_eq!(code(&moistkit(d, &["predict", "--model", "none.json", "--features", "target.csv", "--out", "p.csv"])), 3);
}

#[test]
fn extract_is_independent_of_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--out", "data", "--per-class", "10", "--seed", "9"]);
    let mut outputs = Vec::new();
    for jobs in ["1", "3", "8"] {
        let out = format!("lbp{jobs}.csv");
        ok(d, &["extract", "--images", "data/target", "--labels", "data/target/labels.csv", "--family", "lbp", "--out", &out, "--jobs", jobs]);
        outputs.push(fs::read(d.join(out)).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}
