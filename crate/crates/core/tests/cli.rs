use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irs-music")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn spectrum_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "spectrum",
        "--irs-elements",
        "32",
        "--snr-db",
        "inf",
        "--pinned-aoas",
        "100,130,160",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spectrum = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(spectrum.starts_with("angle_deg,normalized_power\n0.0000,"));
    assert_eq!(spectrum.lines().count(), 1801);
    let peaks = std::fs::read_to_string(dir.path().join("peaks.csv")).unwrap();
    assert_eq!(peaks.lines().count(), 4);
    assert!(dir.path().join("manifest.json").exists());
    let snaps = std::fs::read_to_string(dir.path().join("snapshots.csv")).unwrap();
    assert!(snaps.starts_with("block,sample,real,imag\n0,0,"));
    // Q=4 blocks of L=6 samples
    assert_eq!(snaps.lines().count(), 1 + 24);
}

#[test]
fn montecarlo_with_config_file_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "irs_elements = 32\nbs_antennas = 2\ntrials = 20\nsnr_db = 20.0\n").unwrap();
    let out = cli(&[
        "montecarlo",
        "--config",
        path(&cfg),
        "--methods",
        "music,capon",
        "--sweep",
        "L=6,8,Q=4",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "method,L,Q,snr_db,trials,errors,error_probability");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("music,6,4,20.0,20,"));
    assert!(lines[4].starts_with("capon,8,4,20.0,20,"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["irs_elements"], 32);
}

#[test]
fn montecarlo_output_independent_of_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let out = cli(&[
            "montecarlo",
            "--irs-elements",
            "32",
            "--trials",
            "30",
            "--threads",
            threads,
            "--out",
            path(dir.path()),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(
        std::fs::read(a.path().join("report.csv")).unwrap(),
        std::fs::read(b.path().join("report.csv")).unwrap()
    );
}

#[test]
fn invalid_input_exits_nonzero_with_diagnostic() {
    let out = cli(&["montecarlo", "--users", "3", "--block-len", "3"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = cli(&["spectrum", "--config", "/nonexistent/cfg.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/cfg.toml"));

    let out = cli(&["montecarlo", "--sweep", "X=1"]);
    assert!(!out.status.success());

    let out = cli(&["montecarlo", "--methods", "esprit"]);
    assert!(!out.status.success());
}

#[test]
fn config_subcommand_prints_effective_toml() {
    let out = cli(&["config", "--block-len", "8", "--full-scale"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("block_len = 8"));
    assert!(text.contains("trials = 5000"));
}
