use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn icacdma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icacdma"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

const SMALL: [&str; 10] = [
    "--set", "users=4",
    "--set", "symbols=400",
    "--set", "snr_db=-5,0",
    "--set", "noise=awgn",
    "--set", "runs_per_point=2",
];

fn run_small(out: &Path) -> Output {
    let mut args = vec!["run", "--out", out.to_str().unwrap(), "--threads", "2"];
    args.extend(SMALL);
    icacdma(&args)
}

#[test]
fn codes_dump_is_33_lines_of_31_chips() {
    let out = icacdma(&["codes"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 33);
    for line in &lines {
        let chips: Vec<&str> = line.split(' ').collect();
        assert_eq!(chips.len(), 31);
        assert!(chips.iter().all(|c| *c == "+1" || *c == "-1"));
    }
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("codes.txt");
    assert!(icacdma(&["codes", "--out", file.to_str().unwrap()]).status.success());
    assert_eq!(fs::read_to_string(file).unwrap(), text);
}

#[test]
fn run_writes_tables_and_plots_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_small(a.path()).status.success());
    assert!(run_small(b.path()).status.success());
    for name in ["ser_awgn_M400.csv", "ser_awgn_M400.svg"] {
        let first = fs::read(a.path().join(name)).unwrap();
        assert!(!first.is_empty());
        assert_eq!(first, fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let csv = fs::read_to_string(a.path().join("ser_awgn_M400.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("snr_db,algorithm,detector,mean_ser,stderr,failed_runs,mean_iterations")
    );
    // 2 SNRs × (1 SUD + 3 algorithms × 2 ICA detectors).
    assert_eq!(lines.clone().count(), 14);
    assert!(lines.clone().filter(|l| l.contains(",sud,")).all(|l| l.contains(",none,sud,")));
    assert!(a.path().join("wallclock.tsv").exists());
}

#[test]
fn plot_rerenders_identical_svgs_from_csvs() {
    let run_dir = tempfile::tempdir().unwrap();
    assert!(run_small(run_dir.path()).status.success());
    let plot_dir = tempfile::tempdir().unwrap();
    let out = icacdma(&[
        "plot",
        run_dir.path().to_str().unwrap(),
        "--out",
        plot_dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let name = "ser_awgn_M400.svg";
    assert_eq!(
        fs::read(run_dir.path().join(name)).unwrap(),
        fs::read(plot_dir.path().join(name)).unwrap()
    );
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "users = 30\nfrobnicate = true\n").unwrap();
    let out = icacdma(&["run", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frobnicate"));

    fs::write(&bad, "users = 30\nchips = [\n").unwrap();
    let out = icacdma(&["run", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let out = icacdma(&["run", "--set", "runs_per_point=0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("missing.toml");
    let out = icacdma(&["run", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // Output path is a file, so it cannot be used as a directory.
    let file = dir.path().join("occupied");
    fs::write(&file, "").unwrap();
    let mut args = vec!["run", "--out", file.to_str().unwrap()];
    args.extend(SMALL);
    assert_eq!(icacdma(&args).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_1() {
    let empty = tempfile::tempdir().unwrap();
    let out = icacdma(&["plot", empty.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ser_awgn_M400.csv"), "not,a,table\n").unwrap();
    let out = icacdma(&["plot", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
