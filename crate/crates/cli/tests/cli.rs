use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rbki(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbki"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("RBKI_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn rank_above_dimension_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rbki(dir.path(), &["approx", "--spec", "poly:1", "--n", "10", "--d", "8", "--k", "9", "--b", "3"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("min(n, d)"));
}

#[test]
fn lab_block_size_must_divide_k() {
    let dir = tempfile::tempdir().unwrap();
    let o = rbki(dir.path(), &["lab", "--k", "24", "--b", "5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("does not divide"));
}

#[test]
fn verify_lists_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = rbki(dir.path(), &["verify", "--list"]);
    assert_eq!(code(&o), 0);
    let listed = String::from_utf8(o.stdout).unwrap();
    assert_eq!(listed.lines().count(), rbki::acceptance::CRITERIA.len());
}

#[test]
fn inflated_calibration_fails_the_sigma_min_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = rbki(dir.path(), &["--threads", "1", "verify", "--only", "2", "--calibration-c", "1e30"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let line = stdout.lines().next().unwrap();
    assert!(line.starts_with("[FAIL]") && line.contains(" 2: "), "{stdout}");
}

#[test]
fn unknown_criterion_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rbki(dir.path(), &["verify", "--only", "99"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[approx]\nk = 4\nblock = 2\n").unwrap();
    let o = rbki(dir.path(), &["--config", cfg.to_str().unwrap(), "approx", "--spec", "poly:1", "--n", "20"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("block"), "{}", stderr(&o));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 7\nstrict = true\n[approx]\nk = 4\nb = [2]\nq = 6\n[approx.matrix]\nspec = \"geometric:0.8\"\nn = 30\n")
        .unwrap();
    let out = dir.path().join("out");
    let o = rbki(&out, &["--config", cfg.to_str().unwrap(), "approx", "--k", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let echoed = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echoed.contains("k = 3"), "{echoed}");
    assert!(echoed.contains("q = 6"));
    assert!(echoed.contains("seed = 7"));
}

#[test]
fn missing_input_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.mtx");
    let o = rbki(dir.path(), &["approx", "--input", missing.to_str().unwrap(), "--k", "2", "--b", "1"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn repeated_top_value_without_smoothing_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ["approx", "--spec", "list:1,1,0.5,0.25", "--n", "20", "--k", "2", "--b", "1"];
    let o = rbki(dir.path(), &spec);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("--gamma"));
    let smoothed: Vec<&str> = spec.iter().copied().chain(["--gamma", "0.01"]).collect();
    let o = rbki(dir.path(), &smoothed);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn file_input_round_trips_through_approx() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.mtx");
    let m = rbki::synth_matrix(&rbki::SpectrumSpec::new(rbki::SpectrumKind::Geometric { ratio: 0.7 }, 25, 20, 3))
        .unwrap();
    rbki::write_matrix(&input, &m.matrix, rbki::MatrixFormat::MatrixMarket).unwrap();
    let out = dir.path().join("out");
    let o = rbki(
        &out,
        &["approx", "--input", input.to_str().unwrap(), "--exact-reference", "--k", "3", "--b", "1,3"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let left = rbki::read_matrix(&out.join("factors_b3_left.bin"), rbki::MatrixFormat::RawBinary).unwrap();
    assert_eq!(left.shape(), (25, 3));
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(records.lines().filter(|l| l.ends_with(",true")).count(), 2, "{records}");
}

fn snapshot(dir: &Path, names: &[&str]) -> Vec<Vec<u8>> {
    names.iter().map(|n| fs::read(dir.join(n)).unwrap()).collect()
}

#[test]
fn strict_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<Vec<u8>>> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let approx = [
                "--strict", "approx", "--spec", "geometric:0.85", "--n", "60", "--d", "40", "--k", "6", "--b", "1,2,6",
                "--trials", "3",
            ];
            assert_eq!(code(&rbki(&out, &approx)), 0);
            let lab = ["--strict", "lab", "--k", "8", "--b", "2,4", "--trials", "10"];
            assert_eq!(code(&rbki(&out, &lab)), 0);
            let bench = [
                "--strict", "bench", "--spec", "poly:1", "--n", "50", "--k", "5", "--b", "1,5", "--trials", "3",
            ];
            assert_eq!(code(&rbki(&out, &bench)), 0);
            snapshot(
                &out,
                &[
                    "records.csv",
                    "factors_b2_left.bin",
                    "factors_b6_sigma.bin",
                    "lab_trials.csv",
                    "lab_summary.csv",
                    "bench.csv",
                    "bench_trajectory.csv",
                    "bench.gp",
                ],
            )
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let records = String::from_utf8(runs[0][0].clone()).unwrap();
    let wall = records.lines().next().unwrap().split(',').position(|c| c == "wall_time_s").unwrap();
    assert!(records.lines().skip(1).all(|l| l.split(',').nth(wall) == Some("")));
}
