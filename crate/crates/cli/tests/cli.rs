use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sabmis::raster::{read_pgm, write_pgm};
use sabmis::{PgmDepth, RasterF64};

fn sabmis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sabmis")).args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn image(side: usize, phase: f64) -> RasterF64 {
    RasterF64::from_fn(side, side, |r, c| {
        let v = 128.0 + 80.0 * ((r as f64 * 0.2 + phase).sin() * (c as f64 * 0.15 - phase).cos());
        v.round().clamp(0.0, 255.0)
    })
    .unwrap()
}

/// Small workspace: 64x64 cover, four 32x32 secrets and a matching key.
struct Fixture {
    dir: tempfile::TempDir,
    cover: PathBuf,
    secrets: Vec<PathBuf>,
    key: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let cover = dir.path().join("cover.pgm");
    write_pgm(&image(64, 0.0), &cover, PgmDepth::Eight).unwrap();
    let secrets: Vec<PathBuf> = (0..4)
        .map(|i| {
            let p = dir.path().join(format!("secret{i}.pgm"));
            write_pgm(&image(32, 1.0 + i as f64), &p, PgmDepth::Eight).unwrap();
            p
        })
        .collect();
    let key = dir.path().join("k.skey");
    let out = sabmis(&["keygen", "--seed", "42", "--out", s(&key), "--cover-size", "64", "--secret-size", "32"]);
    assert!(out.status.success(), "{}", stderr(&out));
    Fixture { dir, cover, secrets, key }
}

fn embed_args<'a>(f: &'a Fixture, out: &'a Path) -> Vec<&'a str> {
    let mut args = vec!["embed", "--cover", s(&f.cover), "--key", s(&f.key), "--out", s(out)];
    for p in &f.secrets {
        args.extend(["--secret", s(p)]);
    }
    args
}

#[test]
fn keygen_defaults_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.skey"), dir.path().join("b.skey"));
    assert!(sabmis(&["keygen", "--seed", "42", "--out", s(&a)]).status.success());
    assert!(sabmis(&["keygen", "--seed", "42", "--out", s(&b)]).status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    for line in ["seed = 42", "N = 1024", "M = 512", "p1 = 32", "p2 = 32", "m = 320", "c = 8", "assignment = 1,2,3,4"] {
        assert!(text.contains(line), "missing {line:?} in\n{text}");
    }
}

#[test]
fn keygen_reports_violated_inequality() {
    let dir = tempfile::tempdir().unwrap();
    let out = sabmis(&["keygen", "--seed", "1", "--out", s(&dir.path().join("k")), "--c", "20"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("p1-2c >= 1 violated"), "{}", stderr(&out));
}

#[test]
fn embed_extract_round_trip() {
    let f = fixture();
    let stego = f.dir.path().join("stego.srf");
    let view = f.dir.path().join("stego.pgm");
    let mut args = embed_args(&f, &stego);
    args.extend(["--export-pgm8", s(&view)]);
    let out = sabmis(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["capacity_bpp"], 8.0);
    assert_eq!(report["sub_images"].as_array().unwrap().len(), 4);
    assert_eq!(read_pgm::<f64>(&view).unwrap().width(), 64);

    let prefix = f.dir.path().join("secret_out_");
    let out = sabmis(&["extract", "--stego", s(&stego), "--key", s(&f.key), "--out-prefix", s(&prefix)]);
    assert!(out.status.success(), "{}", stderr(&out));
    for i in 1..=4 {
        let r = read_pgm::<f64>(format!("{}{i}.pgm", s(&prefix))).unwrap();
        assert_eq!((r.width(), r.height()), (32, 32));
    }

    // embedding is deterministic down to the container bytes
    let again = f.dir.path().join("again.srf");
    assert!(sabmis(&embed_args(&f, &again)).status.success());
    assert_eq!(std::fs::read(&stego).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn wrong_key_still_extracts() {
    let f = fixture();
    let stego = f.dir.path().join("stego.srf");
    assert!(sabmis(&embed_args(&f, &stego)).status.success());
    let other = f.dir.path().join("other.skey");
    assert!(sabmis(&["keygen", "--seed", "43", "--out", s(&other), "--cover-size", "64", "--secret-size", "32"]).status.success());
    let prefix = f.dir.path().join("w");
    let out = sabmis(&["extract", "--stego", s(&stego), "--key", s(&other), "--out-prefix", s(&prefix)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(Path::new(&format!("{}4.pgm", s(&prefix))).exists());
}

#[test]
fn five_secrets_is_a_usage_error() {
    let f = fixture();
    let stego = f.dir.path().join("stego.srf");
    let mut args = embed_args(&f, &stego);
    args.extend(["--secret", s(&f.secrets[0])]);
    let out = sabmis(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at most 4"), "{}", stderr(&out));
    assert!(!stego.exists());
}

#[test]
fn cover_size_mismatch_names_expected_size() {
    let dir = tempfile::tempdir().unwrap();
    let key = dir.path().join("k.skey");
    assert!(sabmis(&["keygen", "--seed", "1", "--out", s(&key)]).status.success());
    let cover = dir.path().join("cover.pgm");
    write_pgm(&RasterF64::filled(1000, 1000, 90.0).unwrap(), &cover, PgmDepth::Eight).unwrap();
    let secret = dir.path().join("s.pgm");
    write_pgm(&RasterF64::filled(512, 512, 90.0).unwrap(), &secret, PgmDepth::Eight).unwrap();
    let mut args = vec!["embed", "--cover", s(&cover), "--key", s(&key), "--out", "unused.srf"];
    for _ in 0..4 {
        args.extend(["--secret", s(&secret)]);
    }
    let out = sabmis(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("1024"), "{}", stderr(&out));
}

#[test]
fn extract_rejects_wrong_dimensions() {
    let f = fixture();
    let small = f.dir.path().join("small.pgm");
    write_pgm(&image(48, 0.0), &small, PgmDepth::Eight).unwrap();
    let out = sabmis(&["extract", "--stego", s(&small), "--key", s(&f.key), "--out-prefix", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("64x64"), "{}", stderr(&out));
}

#[test]
fn metrics_json() {
    let f = fixture();
    let json = f.dir.path().join("m.json");
    let out = sabmis(&["metrics", "--ref", s(&f.cover), "--test", s(&f.cover), "--json", s(&json)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["psnr_db"], "inf");
    assert_eq!(v["mssim"], 1.0);
    assert_eq!(v["nae"], 0.0);
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(file, v);

    let out = sabmis(&["metrics", "--ref", s(&f.cover), "--test", s(&f.secrets[0])]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_failures_exit_with_three() {
    let f = fixture();
    let out = sabmis(&["metrics", "--ref", "/nonexistent/a.pgm", "--test", s(&f.cover)]);
    assert_eq!(out.status.code(), Some(3));
    let junk = f.dir.path().join("junk.pgm");
    std::fs::write(&junk, b"P6\n1 1\n255\n\0\0\0").unwrap();
    let out = sabmis(&["metrics", "--ref", s(&junk), "--test", s(&f.cover)]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let broken_key = f.dir.path().join("broken.skey");
    std::fs::write(&broken_key, "version = 1\nseed = x\n").unwrap();
    let out = sabmis(&["extract", "--stego", s(&f.cover), "--key", s(&broken_key), "--out-prefix", "x"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn bench_writes_report_and_csv() {
    let f = fixture();
    let covers = f.dir.path().join("covers");
    let secrets = f.dir.path().join("secrets");
    std::fs::create_dir_all(&covers).unwrap();
    std::fs::create_dir_all(&secrets).unwrap();
    std::fs::copy(&f.cover, covers.join("one.pgm")).unwrap();
    for (i, p) in f.secrets.iter().enumerate() {
        std::fs::copy(p, secrets.join(format!("{i}.pgm"))).unwrap();
    }
    let (report, csv) = (f.dir.path().join("bench.json"), f.dir.path().join("bench.csv"));
    let out = sabmis(&[
        "bench", "--covers", s(&covers), "--secrets", s(&secrets), "--key", s(&f.key), "--report", s(&report), "--csv", s(&csv),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["completed"], serde_json::json!(["one"]));
    let curve: Vec<f64> = v["covers"][0]["psnr"].as_array().unwrap().iter().map(|c| c["mean_psnr_db"].as_f64().unwrap()).collect();
    assert_eq!(curve.len(), 4);
    assert!(curve.windows(2).all(|w| w[0] >= w[1]), "{curve:?}");
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("cover,num_secrets,mean_psnr_db\n"));

    let empty = f.dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let out = sabmis(&["bench", "--covers", s(&empty), "--secrets", s(&secrets), "--key", s(&f.key), "--report", s(&report)]);
    assert_eq!(out.status.code(), Some(2));
}
