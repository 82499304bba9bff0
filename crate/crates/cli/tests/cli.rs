use std::process::Command;

fn ambc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ambc"))
        .args(args)
        .output()
        .expect("spawn ambc")
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("ambc-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn ber_sweep_to_stdout() {
    let out = ambc(&[
        "ber-sweep",
        "--trials",
        "100",
        "--snr",
        "-5,5",
        "--analytic-draws",
        "200",
        "--seed",
        "3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("x_value,x_unit,ber_empirical,ber_analytic,trials"));
    assert!(lines[1].starts_with("-5.0,dB,"));
    assert!(lines[2].ends_with(",3"));
}

#[test]
fn out_flag_writes_csv_and_metadata() {
    let dir = tmp("out");
    let path = dir.join("mse.csv");
    let out = ambc(&[
        "mse-sweep",
        "--param",
        "d",
        "--trials",
        "20",
        "--snr",
        "10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("x_value,x_unit,mse,"));
    let meta = std::fs::read_to_string(dir.join("mse.csv.meta.toml")).unwrap();
    assert!(meta.contains("mse-sweep --param d"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_is_read_and_flags_override() {
    let dir = tmp("cfg");
    let path = dir.join("exp.toml");
    std::fs::write(&path, "trials = 30\nsnr_grid = [0.0, 1.0, 2.0]\nseed = 9\n").unwrap();
    let out = ambc(&[
        "ber-sweep",
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "11",
        "--analytic-draws",
        "100",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.contains(",30,") && l.ends_with(",11")));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn selftest_passes() {
    let out = ambc(&["selftest"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS]"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn analytic_table() {
    let out = ambc(&["analytic", "--snr", "0,10", "--analytic-draws", "100"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8(out.stdout).unwrap().lines().count() >= 3);
}

#[test]
fn invalid_input_is_rejected() {
    assert!(!ambc(&["ber-sweep", "--no-such-flag"]).status.success());
    assert!(!ambc(&["ber-sweep", "--trials", "0"]).status.success());
    assert!(!ambc(&["combiner-sweep", "--trials", "10"]).status.success());
    assert!(!ambc(&["mse-sweep", "--param", "x"]).status.success());
}
