use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn latcov(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latcov"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("LATCOV_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn densities_example() {
    let tmp = tempfile::tempdir().unwrap();
    let o = latcov(&["densities", "--p", "5", "--alpha", "1", "--kmax", "3"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(tmp.path(), "densities.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,k,nk,den,closed_num,closed_den"));
    assert_eq!(lines.nth(1), Some("5,1,105,125,13,15"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("3/3 hold"));
}

#[test]
fn identical_configs_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["covar-window", "--tmax", "200", "--ymax", "100", "--h", "0.02", "--seed", "7"];
    assert!(latcov(&args, a.path()).status.success());
    assert!(latcov(&args, b.path()).status.success());
    for name in ["report.csv", "config.txt", "summary.txt"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let spec = ["spectrum", "--form", "2/5,1/3,7/4", "--ymax", "15", "--plot"];
    assert!(latcov(&spec, a.path()).status.success());
    assert!(latcov(&spec, b.path()).status.success());
    assert_eq!(read(a.path(), "spectrum.csv"), read(b.path(), "spectrum.csv"));
    assert!(read(a.path(), "spectrum.gp").contains("spectrum.csv"));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = a.path().join("in.txt");
    fs::write(&cfg, "# sums\nkind = square_case\na = 3\nb = 1\nnmin = 1000\nnmax = 50000\n").unwrap();
    let o = latcov(&["appendix-sums", "--config", cfg.to_str().unwrap(), "--points", "6"], a.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let echo = read(a.path(), "config.txt");
    assert!(echo.contains("points = 6") && echo.contains("kind = square_case") && echo.contains("command = appendix-sums"));
    let again = b.path().join("again.txt");
    fs::write(&again, &echo).unwrap();
    assert!(latcov(&["appendix-sums", "--config", again.to_str().unwrap()], b.path()).status.success());
    assert_eq!(read(a.path(), "sums.csv"), read(b.path(), "sums.csv"));
    assert_eq!(read(b.path(), "config.txt"), echo);
}

#[test]
fn flags_override_the_file_and_commands_must_match() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.txt");
    fs::write(&cfg, "command = densities\np = 7\nalpha = 3\nkmax = 2\n").unwrap();
    assert!(latcov(&["densities", "--config", cfg.to_str().unwrap(), "--p", "11"], tmp.path()).status.success());
    assert!(read(tmp.path(), "config.txt").contains("p = 11"));
    let o = latcov(&["spectrum", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(latcov(&["no-such-command"], tmp.path()).status.code(), Some(1));
    assert_eq!(latcov(&["spectrum", "--form", "1,2,1"], tmp.path()).status.code(), Some(1));
    assert_eq!(latcov(&["densities", "--p", "4"], tmp.path()).status.code(), Some(1));
    assert_eq!(latcov(&["verify", "--suite", "nonsense"], tmp.path()).status.code(), Some(1));
    let o = latcov(&["verify", "--suite", "quadform"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(read(tmp.path(), "verify.txt").contains("checks passed"));
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_latcov"))
        .args(["constant-c", "--a", "1", "--b", "1", "--terms", "100000"])
        .env("LATCOV_OUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let csv = read(&tmp.path().join("constant-c"), "constant.csv");
    assert!(csv.starts_with("factor,value\n") && csv.contains("\nC,"));
}

#[test]
fn eigenvalue_export() {
    let tmp = tempfile::tempdir().unwrap();
    let o = latcov(&["count", "--domain", "rectangle:1,1", "--x", "10"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(tmp.path(), "eigenvalues.csv");
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "lambda,multiplicity");
    let mults: Vec<&str> = rows[1..].iter().map(|r| r.rsplit(',').next().unwrap()).collect();
    assert_eq!(mults, ["1", "2", "1", "2"]);
}
