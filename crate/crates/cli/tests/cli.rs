use std::path::Path;
use std::process::Command;

use polarnet_cli::report::{CSV_HEADER, JSON_FILE};
use polarnet_cli::stats::aggregate_statistics;
use polarnet_cli::{
    emit_report, run_scenario, ChannelConfig, NoiseConfig, OutputFormat, PolicyConfig, PolicyKind,
    ScenarioConfig, ScenarioReport,
};
use proptest::prelude::*;

fn policy(id: &str, kind: PolicyKind, k: Option<usize>) -> PolicyConfig {
    PolicyConfig {
        id: id.into(),
        kind,
        beta: 1.0,
        k,
    }
}

fn small_config(channel: ChannelConfig) -> ScenarioConfig {
    ScenarioConfig {
        name: "small".into(),
        layer_sizes: vec![3, 4, 2],
        channel,
        policies: vec![
            policy("l2", PolicyKind::Ball2, None),
            policy("linf", PolicyKind::BallInf, None),
            policy("k2", PolicyKind::AtMostK, Some(2)),
            policy("one", PolicyKind::SelectOne, None),
        ],
        noise: NoiseConfig::default(),
        experiments: 12,
        outer_passes: 5,
        root_seed: 99,
        normalization_reference: "l2".into(),
        bound_samples: 500,
    }
}

fn rician() -> ChannelConfig {
    ChannelConfig::RicianGrid {
        interlayer_spacing: 100.0,
        intralayer_spacing: 10.0,
        carrier_frequency: 2e9,
        k_factor: 0.5,
    }
}

fn iid() -> ChannelConfig {
    ChannelConfig::IidGaussian { sigma_h: 1.0 }
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&path).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn json_report_round_trips() {
    let report = run_scenario(&small_config(iid())).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&report, OutputFormat::Json, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join(JSON_FILE)).unwrap();
    let back: ScenarioReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
    assert!(report.bounds.is_some());
}

#[test]
fn csv_has_one_row_per_inner_iteration() {
    let config = small_config(rician());
    let report = run_scenario(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_report(&report, OutputFormat::Csv, dir.path()).unwrap();
    assert_eq!(written.len(), 4);
    for p in &config.policies {
        let text = std::fs::read_to_string(dir.path().join(format!("{}.csv", p.id))).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), config.outer_passes * config.layers() + 1);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("1,"));
    }
    assert!(report.bounds.is_none());
}

#[test]
fn emitting_twice_gives_identical_bytes() {
    let report = run_scenario(&small_config(rician())).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        emit_report(&report, format, a.path()).unwrap();
        emit_report(&report, format, b.path()).unwrap();
    }
    assert_eq!(read_dir(a.path()), read_dir(b.path()));
}

#[test]
fn reference_policy_ends_at_one() {
    for channel in [rician(), iid()] {
        let report = run_scenario(&small_config(channel)).unwrap();
        let reference = report.policy("l2").unwrap();
        let last = reference.series.last().unwrap();
        assert_eq!(last.mean, 1.0);
        assert_eq!((last.sigma_upper, last.sigma_lower), (0.0, 0.0));
        for p in &report.policies {
            assert_eq!(p.monotone_experiments, report.experiments, "{}", p.id);
        }
    }
}

#[test]
fn single_scalar_chain_experiment() {
    let mut config = small_config(iid());
    config.layer_sizes = vec![1, 1];
    config.experiments = 1;
    config.policies.retain(|p| p.id != "k2");
    let report = run_scenario(&config).unwrap();
    // With one repeater per layer every policy ends at full gain.
    for p in &report.policies {
        assert_eq!(p.series.last().unwrap().mean, 1.0, "{}", p.id);
        assert_eq!(p.series.last().unwrap().samples, 1);
    }
}

#[test]
fn invalid_config_is_rejected_with_field_names() {
    let mut config = small_config(iid());
    config.normalization_reference = "nope".into();
    let err = run_scenario(&config).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("normalization_reference"));
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polarnet"))
}

fn write_config(dir: &Path, config: &ScenarioConfig) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_config(iid()));
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("out{workers}"));
        let status = binary()
            .env("POLARNET_WORKERS", workers)
            .args(["run", "--format", "json", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(read_dir(&out));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn overrides_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_config(rician()));
    let out = dir.path().join("out");
    let status = binary()
        .args([
            "run",
            "--experiments",
            "2",
            "--outer-passes",
            "3",
            "--seed",
            "5",
            "--format",
            "json",
            "--config",
        ])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: ScenarioReport =
        serde_json::from_slice(&std::fs::read(out.join(JSON_FILE)).unwrap()).unwrap();
    assert_eq!(
        (
            report.experiments,
            report.outer_passes,
            report.provenance.root_seed
        ),
        (2, 3, 5)
    );
    assert_eq!(report.provenance.config_sha256.len(), 64);

    let ok = binary()
        .args(["validate", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": "x"}"#).unwrap();
    let status = binary()
        .args(["validate", "--config"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let missing = binary()
        .args(["validate", "--config"])
        .arg(dir.path().join("none.json"))
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(2));
    let zero = binary()
        .args(["run", "--experiments", "0", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(zero.code(), Some(2));
    let workers = binary()
        .env("POLARNET_WORKERS", "zero")
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(workers.code(), Some(1));
}

#[test]
fn shipped_configs_validate() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in std::fs::read_dir(configs).unwrap() {
        ScenarioConfig::load(&entry.unwrap().path()).unwrap();
    }
}

proptest! {
    #[test]
    fn deviations_are_non_negative_and_mean_is_bracketed(
        columns in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 1..20)
    ) {
        let series = aggregate_statistics(&columns).unwrap();
        for (t, p) in series.points.iter().enumerate() {
            let lo = columns.iter().map(|c| c[t]).fold(f64::INFINITY, f64::min);
            let hi = columns.iter().map(|c| c[t]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(p.sigma_upper >= 0.0 && p.sigma_lower >= 0.0);
            prop_assert!(lo <= p.mean && p.mean <= hi);
            prop_assert_eq!(p.samples, columns.len());
        }
    }
}
