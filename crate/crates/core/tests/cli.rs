use std::path::Path;
use std::process::{Command, Output};

fn feplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feplab"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.toml");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"
[oracle]
family = "in_family"
[sweep]
points = 2
[generate]
train_frames = 400
test_frames = 20
[neural]
hidden = [8]
max_epochs = 3
"#;

#[test]
fn zero_frames_give_header_only_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SMALL.replace("train_frames = 400", "train_frames = 0"),
    );
    let out = dir.path().join("o");
    let res = feplab(&["--config", &cfg, "--out", out.to_str().unwrap(), "generate"]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let text = std::fs::read_to_string(out.join("train.fepds")).unwrap();
    assert_eq!(
        text,
        "#fepds v1 M=64 K=8 rates=0.04,0.08,0.12,0.16,0.2,0.24,0.28,0.32 S=4 J=2\n"
    );
    assert!(out.join("test").join("snr_01.fepds").exists());
}

#[test]
fn full_run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("o");
    let out_s = out.to_str().unwrap();
    let res = feplab(&["--config", &cfg, "--out", out_s, "--seed", "9", "run"]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let stdout = String::from_utf8_lossy(&res.stdout);
    for table in [
        "calibration.csv",
        "train_log.csv",
        "rmse.csv",
        "throughput.csv",
    ] {
        assert!(stdout.contains(table), "{stdout}");
    }
    let report = feplab(&["--out", out_s, "report"]);
    assert!(report.status.success());
    assert!(String::from_utf8_lossy(&report.stdout).contains("tput_genie"));
    let recorded = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(recorded.contains("root = 9"), "{recorded}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "[sweep]\npoints = 0\n");
    assert_eq!(
        feplab(&["--config", &bad, "generate"]).status.code(),
        Some(2)
    );
    assert_eq!(
        feplab(&["--source", "oracle", "show-config"]).status.code(),
        Some(2)
    );
    assert_eq!(
        feplab(&["--source", "bogus", "show-config"]).status.code(),
        Some(2)
    );

    let cfg = write_config(dir.path(), SMALL);
    let empty = dir.path().join("empty");
    let res = feplab(&[
        "--config",
        &cfg,
        "--out",
        empty.to_str().unwrap(),
        "calibrate",
    ]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("run `generate` first"));
    assert_eq!(
        feplab(&["--out", empty.to_str().unwrap(), "report"])
            .status
            .code(),
        Some(3)
    );

    let out = dir.path().join("o");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(
        out.join("train.fepds"),
        "#fepds v1 M=64 K=8 rates=0.04,0.08,0.12,0.16,0.2,0.24,0.28,0.32 S=4 J=2\n0 00 0\n",
    )
    .unwrap();
    let res = feplab(&["--config", &cfg, "--out", out.to_str().unwrap(), "train"]);
    assert_eq!(
        res.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn show_config_applies_overrides() {
    let res = feplab(&["--seed", "42", "--out", "elsewhere", "show-config"]);
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    assert!(text.contains("out_dir = \"elsewhere\""), "{text}");
    assert!(text.contains("root = 42"), "{text}");
    assert!(text.contains("subcarrier_spacing_hz = 140625"), "{text}");
}
