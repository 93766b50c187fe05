use std::fs;
use std::process::Command;

fn pixdrive() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pixdrive"))
}

#[test]
fn bench_gen_writes_a_seeded_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = pixdrive()
            .args(["bench", "gen", "--synth", "lines", "--count", "50", "--tiles", "30", "--zoom-min", "5"])
            .args(["--zoom-max", "9", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert_eq!(a.lines().next(), Some("z,x,y"));
    assert_eq!(a.lines().count(), 31);
}

#[test]
fn register_persists_then_rejects_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("pts.csv");
    fs::write(&data, "lon,lat\n116.39,39.90\n2.35,48.85\n").unwrap();
    let register = || {
        pixdrive()
            .args(["register", "cities"])
            .arg(&data)
            .args(["--format", "csv-points", "--header", "--data-dir"])
            .arg(dir.path().join("catalog"))
            .output()
            .unwrap()
    };
    let first = register();
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let handle: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(handle["counts"]["records"], 2);
    assert!(dir.path().join("catalog/cities/RtreeP.idx").exists());
    assert!(!register().status.success());
}

#[test]
fn bench_complexity_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let status = pixdrive()
        .args(["bench", "complexity", "--sizes", "200,2000", "--tiles", "2", "--oracle-pixels", "8", "--results"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("complexity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("complexity.json")).unwrap()).unwrap();
    assert_eq!(rows[1]["oracle_touches_per_pixel"], 2000.0);
}

#[test]
fn bad_arguments_fail() {
    assert!(!pixdrive().args(["bench", "run", "--rates", "fast"]).status().unwrap().success());
    assert!(!pixdrive().args(["serve", "--set", "workers"]).status().unwrap().success());
    assert!(!pixdrive().args(["serve", "--set", "colour=1"]).status().unwrap().success());
}
