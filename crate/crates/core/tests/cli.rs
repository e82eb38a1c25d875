mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::brute_force_dtw;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wordmatch"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn wordmatch")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn synth(dir: &Path, name: &str, tones: &str, duration: &str) -> PathBuf {
    let o = run(dir, &["synth", "--tones", tones, "--duration", duration, "--out", name]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir.join(name)
}

fn parse_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn extract_reports_shape_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "tone.wav", "1000", "1.0");
    let o = run(dir.path(), &["extract", "tone.wav", "--out", "f.csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "frames=158 dims=39\n");
    let rows = parse_csv(&dir.path().join("f.csv"));
    assert_eq!(rows.len(), 158);
    assert!(rows.iter().all(|r| r.len() == 39));

    // byte-identical on re-run
    let first = fs::read(dir.path().join("f.csv")).unwrap();
    run(dir.path(), &["extract", "tone.wav", "--out", "g.csv"]);
    assert_eq!(first, fs::read(dir.path().join("g.csv")).unwrap());
}

#[test]
fn extract_errors() {
    let dir = tempfile::tempdir().unwrap();
    // 2-channel, 16-bit PCM header with 4 bytes of data
    let mut stereo = Vec::new();
    stereo.extend_from_slice(b"RIFF");
    stereo.extend_from_slice(&40u32.to_le_bytes());
    stereo.extend_from_slice(b"WAVEfmt ");
    stereo.extend_from_slice(&16u32.to_le_bytes());
    for v in [1u16, 2] {
        stereo.extend_from_slice(&v.to_le_bytes());
    }
    stereo.extend_from_slice(&16000u32.to_le_bytes());
    stereo.extend_from_slice(&64000u32.to_le_bytes());
    for v in [4u16, 16] {
        stereo.extend_from_slice(&v.to_le_bytes());
    }
    stereo.extend_from_slice(b"data");
    stereo.extend_from_slice(&4u32.to_le_bytes());
    stereo.extend_from_slice(&[0, 0, 0, 0]);
    fs::write(dir.path().join("stereo.wav"), stereo).unwrap();

    let o = run(dir.path(), &["extract", "stereo.wav", "--out", "f.csv"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("channels"));
    assert_eq!(stderr(&o).lines().count(), 1);
    assert!(stdout(&o).is_empty());

    let o = run(dir.path(), &["extract", "stereo.wav"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn enroll_and_recognize() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, "on1.wav", "300-600,1200", "0.5");
    synth(d, "on2.wav", "300-600,1200", "0.55");
    synth(d, "off.wav", "1200-400,500", "0.5");

    let o = run(d, &["enroll", "on_tv", "on1.wav", "on2.wav", "--store", "db"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let printed: Vec<_> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(printed.len(), 2);
    assert!(printed[0].ends_with("on_tv.1.tpl") && printed[1].ends_with("on_tv.2.tpl"));
    assert!(d.join("db/on_tv.1.tpl").is_file() && d.join("db/on_tv.2.tpl").is_file());
    assert_eq!(code(&run(d, &["enroll", "off_tv", "off.wav", "--store", "db"])), 0);

    let o = run(d, &["recognize", "on2.wav", "--store", "db"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<_> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines[0], "on_tv\t0");
    assert!(lines[1].starts_with("off_tv\t"));

    let o = run(d, &["recognize", "on2.wav", "--store", "db", "--top", "1"]);
    assert_eq!(stdout(&o).lines().count(), 1);

    let o = run(d, &["enroll", "x", "off.wav", "--store", "db", "--frame-len", "200"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("fingerprint"));

    let o = run(d, &["recognize", "on2.wav", "--store", "db", "--nceps", "10"]);
    assert_eq!(code(&o), 3);

    let o = run(d, &["enroll", "on/tv", "off.wav", "--store", "db"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn recognize_empty_store_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "a.wav", "440", "0.2");
    fs::create_dir(dir.path().join("empty")).unwrap();
    let o = run(dir.path(), &["recognize", "a.wav", "--store", "empty"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn zero_band_equals_diagonal_cost() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, "t.wav", "500-900", "0.4");
    synth(d, "q.wav", "700,300", "0.4");
    assert_eq!(code(&run(d, &["enroll", "w", "t.wav", "--store", "db"])), 0);
    run(d, &["extract", "t.wav", "--out", "t.csv"]);
    run(d, &["extract", "q.wav", "--out", "q.csv"]);
    let (t, q) = (parse_csv(&d.join("t.csv")), parse_csv(&d.join("q.csv")));
    assert_eq!(t.len(), q.len());
    let diagonal: f64 = q
        .iter()
        .zip(&t)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
        .sum();

    let o = run(d, &["recognize", "q.wav", "--store", "db", "--band", "0", "--raw-distance"]);
    assert_eq!(code(&o), 0);
    let line = stdout(&o);
    let got: f64 = line.trim().split('\t').nth(1).unwrap().parse().unwrap();
    assert!((got - diagonal).abs() <= 1e-9 * diagonal, "{got} vs {diagonal}");

    let o = run(d, &["recognize", "q.wav", "--store", "db"]);
    let free: f64 = stdout(&o).trim().split('\t').nth(1).unwrap().parse().unwrap();
    assert!(free * (2 * q.len()) as f64 <= got + 1e-9);
}

#[test]
fn compare_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("a.csv"), "0\n1\n2\n").unwrap();
    fs::write(d.join("b.csv"), "0\n2\n").unwrap();
    assert_eq!(brute_force_dtw(&[0.0, 1.0, 2.0], &[0.0, 2.0]), 1.0);

    let o = run(d, &["compare", "a.csv", "b.csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "distance=1 normalized=0.2 path_len=3\n");

    let o = run(d, &["compare", "a.csv", "a.csv"]);
    assert_eq!(stdout(&o), "distance=0 normalized=0 path_len=3\n");

    synth(d, "x.wav", "440", "0.1");
    run(d, &["extract", "x.wav", "--out", "x39.csv"]);
    run(d, &["extract", "x.wav", "--out", "x13.csv", "--nceps", "3"]);
    let o = run(d, &["compare", "x39.csv", "x13.csv"]);
    assert_eq!(code(&o), 3);

    fs::write(d.join("bad.csv"), "1,2\n3\n").unwrap();
    assert_eq!(code(&run(d, &["compare", "bad.csv", "a.csv"])), 3);
}

#[test]
fn export_plot_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, "one.wav", "600-1500", "1.0");
    run(d, &["extract", "one.wav", "--out", "f.csv"]);

    assert_eq!(code(&run(d, &["export-plot", "mfcc", "one.wav", "--out", "m.csv"])), 0);
    let m = parse_csv(&d.join("m.csv"));
    assert_eq!((m.len(), m[0].len()), (158, 39));

    assert_eq!(code(&run(d, &["export-plot", "path", "f.csv", "f.csv", "--out", "p.csv"])), 0);
    let path = fs::read_to_string(d.join("p.csv")).unwrap();
    let expected: String = (1..=158).map(|i| format!("{i},{i}\n")).collect();
    assert_eq!(path, expected);

    fs::write(d.join("a1.csv"), "1,2\n").unwrap();
    fs::write(d.join("b1.csv"), "2,4\n").unwrap();
    assert_eq!(code(&run(d, &["export-plot", "costmatrix", "a1.csv", "b1.csv", "--out", "c.csv"])), 0);
    assert_eq!(parse_csv(&d.join("c.csv")), vec![vec![5.0]]);

    fs::write(d.join("long.csv"), "0\n0\n0\n0\n0\n").unwrap();
    fs::write(d.join("short.csv"), "0\n0\n").unwrap();
    run(d, &["export-plot", "costmatrix", "long.csv", "short.csv", "--band", "0", "--out", "band.csv"]);
    let text = fs::read_to_string(d.join("band.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap().split(',').count(), 2);
    assert!(text.lines().nth(4).unwrap().starts_with("inf,"));

    assert_eq!(code(&run(d, &["export-plot", "signal", "one.wav", "--out", "s.csv"])), 0);
    assert_eq!(fs::read_to_string(d.join("s.csv")).unwrap().lines().count(), 16000);

    assert_eq!(code(&run(d, &["export-plot", "spectrum", "one.wav", "--out", "x.csv"])), 2);
    assert_eq!(code(&run(d, &["export-plot", "path", "f.csv", "--out", "x.csv"])), 2);
    assert_eq!(code(&run(d, &["export-plot", "signal", "missing.wav", "--out", "x.csv"])), 3);
}

#[test]
fn synth_rejects_aliasing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["synth", "--tones", "9000", "--duration", "1", "--out", "a.wav"]);
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("a.wav").exists());
}
