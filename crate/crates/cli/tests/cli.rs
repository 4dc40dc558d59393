use std::path::Path;
use std::process::{Command, Output};

fn wavesum(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavesum"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn summary(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn haar_identity_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavesum(&["haar-identity", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("haar-identity"));
    assert!(dir.path().join("haar_identity.csv").exists());
    assert!(dir.path().join("haar_regularity.csv").exists());
    let s = summary(dir.path());
    assert_eq!(s["config"]["seed"], 3);
    assert_eq!(s["verdicts"]["haar-identity"], true);
}

#[test]
fn concentration_family_and_replicates_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavesum(
        &["concentration", "operator", "--replicates", "2000"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path());
    assert_eq!(s["results"]["concentration-operator"]["replicates"], 2000);
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "seed = 11\n[three_series]\npairs = 2\ninclude_smooth = false\n",
    )
    .unwrap();
    let o = wavesum(
        &["three-series", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path());
    assert_eq!(s["config"]["seed"], 11);
    assert_eq!(
        s["results"]["three-series"]["cells"]
            .as_array()
            .unwrap()
            .len(),
        2 * 2 * 3
    );
}

#[test]
fn failing_certificate_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    // A coarse job leaves too much omitted mass to certify.
    std::fs::write(
        &cfg,
        "[job]\nscale_min = -2\nscale_max = 2\n[three_series]\npairs = 2\ninclude_smooth = false\n",
    )
    .unwrap();
    let o = wavesum(
        &["three-series", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn bad_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "confidence = 2.0\n").unwrap();
    let o = wavesum(&["weak11", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("confidence"));
}
