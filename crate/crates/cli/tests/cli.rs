use std::path::Path;
use std::process::{Command, Output};

fn talbot(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_talbot"))
        .args(["--out", out.to_str().unwrap()])
        .args(args)
        .output()
        .unwrap()
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn spectrum_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = talbot(dir.path(), &["spectrum", "--lambda-max", "0.1", "--levels", "3", "--lambda-steps", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("spectrum.csv");
    assert_eq!(first_line(&path), "lambda,E0,E1,E2,n_max");
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(!text.contains('\r'));
}

#[test]
fn propagate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = talbot(dir.path(), &["propagate", "--lambda", "0.02", "--t-max", "300"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(first_line(&dir.path().join("x_expect.csv")), "t,x_expect");
    assert_eq!(first_line(&dir.path().join("envelope.csv")), "t,envelope");
    assert_eq!(first_line(&dir.path().join("revival_report.csv")), "event,t,value");
    let report = std::fs::read_to_string(dir.path().join("revival_report.txt")).unwrap();
    assert!(report.contains("lambda = 0.02"));
    assert!(report.contains("first_revival = "));
}

#[test]
fn modes_and_dispersive_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = talbot(dir.path(), &["modes", "--modes", "0,3", "--n-max", "32"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(first_line(&dir.path().join("modes_spatial.csv")), "x,phi0,phi3");
    assert_eq!(first_line(&dir.path().join("modes_phase.csv")), "theta,re0,im0,re3,im3");
    let o = talbot(dir.path(), &["dispersive", "--alpha", "1", "--n-max", "64", "--t-max", "10", "--dt", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("dispersive.csv")).unwrap();
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nlambda = 0.05\nn_max = 48\nt_max = 20\ndt = 0.1\nalpha = 0+2i\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_talbot"))
        .args(["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .args(["propagate", "--lambda", "0.03"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("revival_report.txt")).unwrap();
    assert!(report.contains("lambda = 0.03") && report.contains("n_max = 48"));
    let rows = std::fs::read_to_string(dir.path().join("x_expect.csv")).unwrap().lines().count();
    assert_eq!(rows, 202);
}

#[test]
fn errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = talbot(dir.path(), &["propagate", "--lambda", "-1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unbounded potential"));

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "lambda = 0.01\ncolour = red\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_talbot"))
        .args(["--config", cfg.to_str().unwrap(), "spectrum"])
        .output()
        .unwrap();
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(!o.status.success());
    assert!(err.contains("line 2") && err.contains("colour"), "{err}");

    let o = talbot(dir.path(), &["carpet", "--domain", "spatial", "--polar"]);
    assert!(!o.status.success());
    let o = talbot(dir.path(), &["propagate", "--n-max", "16"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_max >="));
}

#[test]
fn carpet_window_and_rasters() {
    let dir = tempfile::tempdir().unwrap();
    let o = talbot(
        dir.path(),
        &["carpet", "--lambda", "0", "--n-max", "64", "--phase-points", "128", "--window", "0,6.2832", "--dt", "0.04908738521234052", "--domain", "phase"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pgm = std::fs::read(dir.path().join("carpet_phase_w0.pgm")).unwrap();
    let header = b"P5\n128 129\n65535\n";
    assert!(pgm.starts_with(header));
    let px: Vec<u16> = pgm[header.len()..]
        .chunks(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    // at λ = 0 each row is row 0 rotated by one phase sample per step
    for k in 0..128 {
        for j in 0..128 {
            let a = px[k * 128 + j] as i32;
            let b = px[(j + 128 - k) % 128] as i32;
            assert!((a - b).abs() <= 1, "row {k} col {j}: {a} vs {b}");
        }
    }
    let side = std::fs::read_to_string(dir.path().join("carpet_phase_w0.pgm.txt")).unwrap();
    assert!(side.contains("normalization = per-frame"));
    assert!(dir.path().join("carpet_phase_w0.ppm").exists());
}

#[test]
fn selftest_passes() {
    let o = Command::new(env!("CARGO_BIN_EXE_talbot")).arg("selftest").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
    assert!(!text.contains("FAIL"));
}

#[test]
fn help_lists_defaults() {
    let o = Command::new(env!("CARGO_BIN_EXE_talbot")).arg("--help").output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    for word in ["spectrum", "modes", "propagate", "carpet", "dispersive", "selftest", "--threads", "alpha = 0+4i"] {
        assert!(text.contains(word), "{word}");
    }
}
