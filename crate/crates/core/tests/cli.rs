use std::process::Command;

fn hilbloch() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hilbloch"))
}

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfgs = dir.path().join("configs");
    let out = dir.path().join("reports");
    assert!(hilbloch().args(["init-configs", "--out"]).arg(&cfgs).status().unwrap().success());
    let o = hilbloch()
        .arg("verify")
        .arg("--config")
        .arg(cfgs.join("L2.5.json"))
        .arg(cfgs.join("remark5.json"))
        .arg("--out")
        .arg(&out)
        .args(["--format", "json", "csv", "md"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.lines().all(|l| l.contains(" agree ")));
    for ext in ["json", "csv", "md"] {
        assert!(out.join(format!("L2.5.{ext}")).exists());
    }
}

#[test]
fn bad_config_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"version":1,"theorem":"T9.9"}"#).unwrap();
    let o = hilbloch().arg("verify").arg("--config").arg(&bad).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn small_commands() {
    let o = hilbloch()
        .args(["moments", "--measure", r#"{"density":{"kind":"power_log","s":0.0}}"#, "--n", "0,1,3"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    for (m, n) in rows.iter().zip([0.0, 1.0, 3.0]) {
        assert!((m - 1.0 / (n + 1.0)).abs() < 1e-12);
    }

    let o = hilbloch()
        .args(["apply", "--series", "[1]", "--config"])
        .arg(r#"{"alpha":0.0,"measure":{"density":{"kind":"power_log","s":0.0}},"truncation":8}"#)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b: Vec<f64> = serde_json::from_slice(&o.stdout).unwrap();
    for (n, x) in b.iter().enumerate() {
        assert!((x - 1.0 / (n as f64 + 1.0)).abs() < 1e-12);
    }

    let o = hilbloch().args(["vn", "--n", "3"]).output().unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("n,k,coefficient"));
}
