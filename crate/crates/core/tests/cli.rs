use std::process::Command;

fn l1pod() -> Command {
    Command::new(env!("CARGO_BIN_EXE_l1pod"))
}

#[test]
fn verify_reports_no_weight_violations() {
    let out = l1pod().args(["verify", "--n-max", "50", "--alphas", "0.3,0.7"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(" 0 violations"), "{text}");
}

#[test]
fn convergence_writes_csv() {
    let dir = std::env::temp_dir().join(format!("l1pod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("a.toml");
    let csv = dir.join("a.csv");
    std::fs::write(
        &cfg,
        "case = \"a\"\nalpha = 0.5\nt_final = 0.1\nsteps = [10, 20]\n[mesh]\ncells = 16\n[reference]\nkind = \"refined\"\nrefine = 2\n",
    )
    .unwrap();
    let out = l1pod().arg("convergence").arg(&cfg).arg("-o").arg(&csv).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "n,tau,e_max,e,rate");
    assert_eq!(rows.len(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unknown_config_key_is_rejected() {
    let cfg = std::env::temp_dir().join(format!("l1pod-bad-{}.toml", std::process::id()));
    std::fs::write(&cfg, "case = \"a\"\nalpha = 0.5\nt_final = 1.0\nsteps = [10]\nbogus = 1\n[mesh]\ncells = 8\n").unwrap();
    let out = l1pod().arg("solve").arg(&cfg).output().unwrap();
    std::fs::remove_file(&cfg).unwrap();
    assert_eq!(out.status.code(), Some(2));
}
