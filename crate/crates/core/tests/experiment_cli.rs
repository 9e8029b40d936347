use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use coalesced_drx::experiment::{emit_csv, parse_spec, run_experiment, ExperimentSpec, CSV_HEADER};
use coalesced_drx::Error;

const SMALL: &str = "\
[experiment]
name = small
seeds = 1..3
horizon = 10000

[traffic]
kind = poisson
rate = 0.1, 0.5

[policy]
kinds = standard, fixed, adaptive
q_w = 8, 32
w_star = 64
";

fn experiments_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments")
}

fn drxsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_drxsim"))
}

fn csv_text(spec: &ExperimentSpec) -> String {
    let mut buf = Vec::new();
    emit_csv(&run_experiment(spec).unwrap(), &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn archived_specs_have_expected_grids() {
    for (name, points) in [("fig4", 36), ("fig5", 18), ("fig6", 3), ("fig7", 27), ("fig8", 5)] {
        let spec = ExperimentSpec::from_file(&experiments_dir().join(format!("{name}.spec"))).unwrap();
        assert_eq!(spec.grid().len(), points, "{name}");
        assert_eq!(spec.name, name);
    }
}

#[test]
fn rows_follow_the_grid() {
    let spec = parse_spec(SMALL).unwrap();
    let text = csv_text(&spec);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    // 2 rates x (standard + 2 fixed + 1 adaptive)
    assert_eq!(lines.len(), 1 + 8);
    let policies: Vec<&str> = lines[1..5].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(policies, ["standard", "fixed", "fixed", "adaptive"]);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 12));
}

#[test]
fn schedule_adds_segment_rows() {
    let text = "[experiment]\nname = steps\nseeds = 1..2\n[traffic]\nkind = schedule\n\
                schedule = 4000:0.1, 4000:0.3\nskip = 500\n[policy]\nkinds = standard, adaptive\nw_star = 64\n";
    let out = csv_text(&parse_spec(text).unwrap());
    let scenarios: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(scenarios, ["steps/seg1", "steps/seg2", "steps", "steps/seg1", "steps/seg2", "steps"]);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let spec = parse_spec(SMALL).unwrap();
    assert_eq!(csv_text(&spec), csv_text(&spec));
}

#[test]
fn missing_trace_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.spec");
    fs::write(&path, "[traffic]\nkind = trace\nfile = nowhere.trace\n[policy]\nkinds = standard\n").unwrap();
    let spec = ExperimentSpec::from_file(&path).unwrap();
    assert!(matches!(run_experiment(&spec), Err(Error::Io(_))));
}

#[test]
fn cli_validate_reports_grid() {
    let out = drxsim().arg("validate").arg(experiments_dir().join("fig4.spec")).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("fig4: 36 grid points"), "{stdout}");
}

#[test]
fn cli_run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("small.spec");
    let csv = dir.path().join("out.csv");
    fs::write(&spec, SMALL).unwrap();
    let status = drxsim()
        .args(["run", spec.to_str().unwrap(), "--out", csv.to_str().unwrap(), "--seeds", "2", "--jobs", "1"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
}

#[test]
fn cli_model_prints_closed_form() {
    let out = drxsim().args(["model", "--rate", "0.1", "--q-w", "8"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let ew: f64 = stdout.lines().next().unwrap().split('=').nth(1).unwrap().trim().trim_end_matches(" ms").parse().unwrap();
    assert!((ew - 33.769157853319).abs() < 1e-9, "{stdout}");
}

#[test]
fn cli_rejects_bad_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.spec");
    fs::write(&path, "[traffic]\nrate = 0.1\nflavour = vanilla\n").unwrap();
    let out = drxsim().arg("validate").arg(&path).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("flavour"), "{stderr}");
}
