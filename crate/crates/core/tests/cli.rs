use std::path::Path;
use std::process::Command;

use clap::Parser;
use plasmonic::cli::{main_with_args, resolve_config, CertificateFile, Cli, RunConfig, Shape, ValidationReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plasmonic"))
}

fn run(out: &Path, args: &[&str]) -> i32 {
    let mut all = vec!["plasmonic", "--out", out.to_str().unwrap()];
    all.extend_from_slice(args);
    main_with_args(all)
}

fn files_with(dir: &Path, prefix: &str, ext: &str) -> Vec<std::path::PathBuf> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy().to_string();
            name.starts_with(prefix) && name.ends_with(ext)
        })
        .collect()
}

const COARSE: [&str; 6] = ["--r", "0.3", "--h", "0.04", "--order", "4"];

#[test]
fn mesh_is_written_and_cached() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &[&COARSE[..], &["mesh"]].concat()), 0);
    let meshes = files_with(dir.path(), "mesh-", ".mesh");
    assert_eq!(meshes.len(), 1);
    let stamp = std::fs::metadata(&meshes[0]).unwrap().modified().unwrap();
    assert_eq!(run(dir.path(), &[&COARSE[..], &["mesh"]].concat()), 0);
    assert_eq!(std::fs::metadata(&meshes[0]).unwrap().modified().unwrap(), stamp);
}

#[test]
fn certify_then_dispersion() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &[&COARSE[..], &["certify"]].concat()), 0);
    let certs = files_with(dir.path(), "certificate-", ".json");
    assert_eq!(certs.len(), 1);
    let file: CertificateFile = serde_json::from_str(&std::fs::read_to_string(&certs[0]).unwrap()).unwrap();
    assert_eq!(file.provenance.config_hash, file.config.hash());
    assert_eq!(file.provenance.mesh_hash, file.certificate.mesh_hash);
    assert!(file.certificate.audit_holds());
    assert_eq!(file.config.h, 0.04);

    assert_eq!(run(dir.path(), &[&COARSE[..], &["--alphas", "0,0.25,0.5", "dispersion"]].concat()), 0);
    let csv = files_with(dir.path(), "dispersion-", ".csv");
    let text = std::fs::read_to_string(&csv[0]).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("eta,alpha,xi2_eta"));
    assert_eq!(files_with(dir.path(), "dispersion-", ".json").len(), 1);
}

#[test]
fn validate_and_fault_injection() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &[&COARSE[..], &["validate"]].concat()), 0);
    let report: ValidationReport =
        serde_json::from_str(&std::fs::read_to_string(&files_with(dir.path(), "validate-", ".json")[0]).unwrap()).unwrap();
    assert!(report.all_passed());
    assert!(report.checks.iter().any(|c| c.name == "parity" && c.passed == Some(true)));

    let status = bin().args(["--out", dir.path().to_str().unwrap()]).args(COARSE).args(["validate", "--fault-inject"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&status.stdout);
    assert!(stdout.contains("FAIL parity") && stdout.contains("m = 1"), "{stdout}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["--r", "0.6", "mesh"]), 2);
    assert_eq!(run(d, &["--h", "-1", "mesh"]), 2);
    assert_eq!(run(d, &["--paper-defaults", "r=0.7", "mesh"]), 2);
    assert_eq!(run(d, &["--paper-defaults", "0.45", "mesh"]), 2);
    assert_eq!(run(d, &["--order", "2", "--h", "0.05", "certify"]), 2);
    assert_eq!(run(d, &["--shape", "rectangle", "--a", "0.3", "--b", "0.2", "--h", "0.05", "certify"]), 2);
    assert_eq!(run(d, &["--shape", "hexagon", "mesh"]), 2);
    assert_eq!(run(d, &["--alphas", "1.2", "mesh"]), 2);
    assert_eq!(run(d, &["frobnicate"]), 2);
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "h = 0.03\norder = 6\nr = 0.2\n").unwrap();
    let p = path.to_str().unwrap();

    let cli = Cli::try_parse_from(["plasmonic", "--paper-defaults", "r=0.45", "mesh"]).unwrap();
    let cfg = resolve_config(&cli).unwrap();
    assert_eq!(cfg, RunConfig::paper_defaults(0.45));
    assert_eq!((cfg.h, cfg.order, cfg.direction, cfg.d), (0.02, 8, [1.0, 0.0], 1e-7));

    let cli = Cli::try_parse_from(["plasmonic", "--paper-defaults", "r=0.45", "--config", p, "mesh"]).unwrap();
    let cfg = resolve_config(&cli).unwrap();
    assert_eq!((cfg.r, cfg.h, cfg.order), (0.2, 0.03, 6));

    let cli = Cli::try_parse_from(["plasmonic", "--config", p, "--h", "0.05", "--direction", "0,1", "mesh"]).unwrap();
    let cfg = resolve_config(&cli).unwrap();
    assert_eq!((cfg.r, cfg.h, cfg.direction), (0.2, 0.05, [0.0, 1.0]));
    assert_eq!(cfg.shape, Shape::Circle);

    std::fs::write(&path, "mesh_size = 0.03\n").unwrap();
    let cli = Cli::try_parse_from(["plasmonic", "--config", p, "mesh"]).unwrap();
    assert!(resolve_config(&cli).unwrap_err().is_usage());
    assert_eq!(main_with_args(["plasmonic", "--config", p, "mesh"]), 2);
}

#[test]
fn report_flags_table_anomalies() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["--out", dir.path().to_str().unwrap(), "--h", "0.05", "--order", "4", "report"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("1/96") && text.contains("1/116"));
    assert!(text.contains("exponent anomaly"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 5);
}
