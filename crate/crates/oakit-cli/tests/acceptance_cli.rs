//! CLI acceptance: manifest-driven determinism (criterion 11) and the
//! command-level contracts (formats, exit codes, shipped configs).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oakit"))
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("oakit-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn criterion_11_rerun_from_manifest_is_byte_identical() {
    let start = Instant::now();
    let dir = scratch_dir("c11");
    std::fs::write(
        dir.join("exp.cfg"),
        "experiment = both\nintegrand = product\nd = 3\nq_list = 5, 7\n\
         designs = oas, oalh, oalh_tang, srs, lhs\nreplicates = 400\nmaster_seed = 1\n\
         quadrature_m = 64\nratio_tol = 2.0\nks_tol = 0.2\nskew_tol = 0.8\nkurt_tol = 2.0\n\
         coverage_tol = 0.06\n",
    )
    .unwrap();

    // Determinism is the criterion here: the run must complete (exit 0 or
    // 1, never a usage error) and the replay must reproduce both the
    // report bytes and the exit code.
    let first = run_in(&dir, &["verify", "--config", "exp.cfg", "--out", "report.json"]);
    assert!(
        matches!(first.status.code(), Some(0) | Some(1)),
        "verify errored:\n{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let report_1 = read(&dir, "report.json");
    let manifest = read(&dir, "report.manifest.json");
    assert!(manifest.contains("\"command\": \"verify\""));

    let second = run_in(
        &dir,
        &[
            "rerun",
            "--manifest",
            "report.manifest.json",
            "--out",
            "report2.json",
        ],
    );
    assert_eq!(second.status.code(), first.status.code());
    let report_2 = read(&dir, "report2.json");
    assert_eq!(report_1, report_2, "rerun drifted from the recorded report");

    let _ = std::fs::remove_dir_all(&dir);
    println!(
        "acceptance 11 (manifest rerun determinism): PASS [{:.2}s]",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn construct_writes_the_text_format_and_round_trips() {
    let dir = scratch_dir("construct");
    let out = run_in(&dir, &["construct", "--q", "3", "--d", "4", "--out", "oa.txt"]);
    assert!(out.status.success());
    let text = read(&dir, "oa.txt");
    assert!(text.starts_with("oa 9 4 3 2 BASE\n"), "header: {text}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("strength-2 verification: ok"));

    // Round trip through rerun: reconstruct from the manifest and compare.
    let rerun = run_in(
        &dir,
        &["rerun", "--manifest", "oa.manifest.json", "--out", "oa2.txt"],
    );
    assert!(rerun.status.success());
    assert_eq!(text, read(&dir, "oa2.txt"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn construct_rejects_non_prime_q_with_exit_2() {
    let dir = scratch_dir("nonprime");
    let out = run_in(&dir, &["construct", "--q", "4", "--d", "3", "--out", "oa.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not prime"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sample_is_deterministic_and_prints_verdicts() {
    let dir = scratch_dir("sample");
    let args = [
        "sample", "--design", "oalh", "--q", "3", "--d", "3", "--seed", "11", "--out", "a.csv",
    ];
    let out1 = run_in(&dir, &args);
    assert!(out1.status.success());
    let stdout = String::from_utf8_lossy(&out1.stdout).to_string();
    assert!(stdout.contains("bivariate stratification: ok"), "{stdout}");
    assert!(stdout.contains("univariate latin: ok"), "{stdout}");

    let mut args2 = args;
    args2[args.len() - 1] = "b.csv";
    assert!(run_in(&dir, &args2).status.success());
    assert_eq!(read(&dir, "a.csv"), read(&dir, "b.csv"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn decompose_reports_the_product_remainder_norm() {
    let dir = scratch_dir("decompose");
    let out = run_in(
        &dir,
        &[
            "decompose", "--integrand", "product", "--d", "3", "--m", "128", "--out", "dec.json",
        ],
    );
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&read(&dir, "dec.json")).unwrap();
    let frem = parsed["frem_l2"].as_f64().unwrap();
    assert!((frem - 1.0 / 1728.0).abs() < 1e-6, "frem_l2 = {frem}");

    let additive = run_in(
        &dir,
        &[
            "decompose", "--integrand", "additive", "--d", "3", "--m", "128", "--out", "add.json",
        ],
    );
    assert!(additive.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&read(&dir, "add.json")).unwrap();
    assert!(parsed["frem_l2"].as_f64().unwrap() <= 1e-10);

    let unknown = run_in(
        &dir,
        &["decompose", "--integrand", "nope", "--d", "3", "--out", "x.json"],
    );
    assert_eq!(unknown.status.code(), Some(2));

    // Replaying the manifest reproduces the artifact.
    let rerun = run_in(
        &dir,
        &["rerun", "--manifest", "dec.manifest.json", "--out", "dec2.json"],
    );
    assert!(rerun.status.success());
    assert_eq!(read(&dir, "dec.json"), read(&dir, "dec2.json"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn verify_rejects_underpowered_configs_with_exit_2() {
    let dir = scratch_dir("underpowered");
    std::fs::write(
        dir.join("bad.cfg"),
        "integrand = product\nq_list = 5\nreplicates = 10\n",
    )
    .unwrap();
    let out = run_in(&dir, &["verify", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replicates"));

    // The flag override is applied before validation.
    std::fs::write(
        dir.join("ok.cfg"),
        "integrand = product\nq_list = 5\nreplicates = 150\n",
    )
    .unwrap();
    let overridden = run_in(
        &dir,
        &["verify", "--config", "ok.cfg", "--replicates", "10"],
    );
    assert_eq!(overridden.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn shipped_additive_ordering_config_passes() {
    let dir = scratch_dir("shipped");
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/tang_additive_d3.cfg");
    let out = run_in(
        &dir,
        &["verify", "--config", cfg.to_str().unwrap(), "--out", "tang.json"],
    );
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("tang_additive_ordering: pass"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn raw_replicate_dump_has_one_row_per_estimate() {
    let dir = scratch_dir("raw");
    std::fs::write(
        dir.join("exp.cfg"),
        "experiment = variance\nintegrand = product\nd = 3\nq_list = 5\ndesigns = oas\n\
         replicates = 150\nmaster_seed = 2\nquadrature_m = 64\nratio_tol = 2.0\n",
    )
    .unwrap();
    let out = run_in(
        &dir,
        &[
            "verify", "--config", "exp.cfg", "--out", "r.json", "--raw-out", "raw.csv",
        ],
    );
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    let raw = read(&dir, "raw.csv");
    let mut lines = raw.lines();
    assert_eq!(lines.next(), Some("design,q,replicate,value"));
    assert_eq!(lines.count(), 150);
    let _ = std::fs::remove_dir_all(&dir);
}
