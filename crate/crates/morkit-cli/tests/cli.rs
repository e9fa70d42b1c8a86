use std::path::Path;
use std::process::Command;

fn morkit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_morkit"))
}

#[test]
fn reduce_writes_rom_files_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = morkit()
        .args(["reduce", "--som-n1", "10", "-r", "4", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for name in [
        "report.json",
        "position_M.mtx",
        "position_K.mtx",
        "velocity_M.mtx",
        "velocity_L.mtx",
    ] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(json["converged"], serde_json::Value::Bool(true));
}

#[test]
fn sigma_writes_csv_with_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sigma.csv");
    let status = morkit()
        .args([
            "sigma",
            "--som-n1",
            "10",
            "-r",
            "4",
            "--grid-min",
            "0.01",
            "--grid-max",
            "100",
            "--grid-points",
            "25",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "omega,sigma_full,sigma_pos,sigma_vel,abs_err_pos,abs_err_vel,rel_err_pos,rel_err_vel"
    );
    assert_eq!(lines.count(), 25);
}

#[test]
fn rejects_missing_model_source() {
    let output = morkit().args(["reduce", "-r", "4"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(!output.stderr.is_empty());
}

#[test]
fn manifest_input_round_trips(){
    let dir = tempfile::tempdir().unwrap();
    let status = morkit()
        .args(["reduce", "--som-n1", "10", "-r", "4", "--out"])
        .arg(dir.path().join("rom"))
        .status()
        .unwrap();
    assert!(status.success());
    // The saved ROM is itself a valid dataset: point a manifest at it.
    let manifest = dir.path().join("rom.json");
    let rom_dir = dir.path().join("rom");
    let entry = |stem: &str| {
        rom_dir
            .join(format!("position_{stem}.mtx"))
            .to_str()
            .unwrap()
            .to_string()
    };
    let body = serde_json::json!({
        "name": "rom-as-input",
        "M": entry("M"),
        "D": entry("D"),
        "K": entry("K"),
        "H": entry("H"),
        "L": entry("L"),
    });
    std::fs::write(&manifest, serde_json::to_string_pretty(&body).unwrap()).unwrap();
    let status = morkit()
        .args(["reduce", "--manifest"])
        .arg(&manifest)
        .args(["-r", "2", "--out"])
        .arg(dir.path().join("rom2"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(Path::new(&dir.path().join("rom2").join("report.json")).is_file());
}
