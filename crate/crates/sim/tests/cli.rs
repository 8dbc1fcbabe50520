use std::path::Path;
use std::process::{Command, Output};

use otfs_sim::io::read_channel_profile;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otfs-sim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn info_reports_data_sizes() {
    let o = run(&["info", "--preset", "table1-15khz"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("data bins: 4560"), "{s}");
    assert!(s.contains("data REs: 3060"), "{s}");
}

#[test]
fn unknown_preset_exits_with_two() {
    let o = run(&["info", "--preset", "no-such-preset"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn negative_doppler_is_rejected() {
    let o = run(&["simulate", "--doppler=-5", "--frames", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "sweep", "--waveform", "ofdm", "--doppler", "0,500,1000", "--frames", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert!(lines[0].contains("doppler_hz"));
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--waveform", "otfs", "--doppler", "300", "--frames", "3", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["simulate", "--waveform", "otfs", "--doppler", "300", "--frames", "3", "--seed", "10"]);
    assert!(c.status.success());
}

#[test]
fn shipped_profile_parses() {
    let p = read_channel_profile(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tdl_a_100ns.txt")).unwrap();
    assert_eq!(p.len(), 23);
    assert!((p.rms_delay_spread - 100e-9).abs() < 10e-9, "{}", p.rms_delay_spread);
    let strongest = p.power_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(strongest, 0.0);
}

#[test]
fn simulate_accepts_channel_file() {
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tdl_a_100ns.txt");
    let o = run(&["simulate", "--waveform", "ofdm", "--frames", "2", "--channel-file", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn config_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let o = run(&["config", "--preset", "table1-30khz"]);
    assert!(o.status.success());
    std::fs::write(&path, &o.stdout).unwrap();
    let a = run(&["info", "--preset", "table1-30khz"]);
    let b = run(&["info", "--config", path.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
}
