//! Config parsing, record emission, sweeps and the `qss` binary.

use std::path::Path;
use std::process::Command;

use qss::adversary::{AttackModel, InterceptPolicy, NoiseModel};
use qss::analysis::{detection_probability_oracle, expected_qber_oracle, useful_rate};
use qss::engine::MemoryMode;
use qss::io::{cmd_oracle, cmd_report, cmd_run, cmd_sweep, parse_config_str, ConfigFile, OracleQuery, ResultRecord, TrialRow};

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/result-record.v1.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn config(text: &str) -> ConfigFile {
    parse_config_str(text).unwrap()
}

fn run_ndjson(cfg: &ConfigFile) -> String {
    let mut out = Vec::new();
    cmd_run(cfg, &mut out, Some(1_700_000_000)).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn every_record_matches_schema_and_round_trips() {
    let validator = schema();
    let texts = [
        "agents = 2\nsignals = 100\nseed = 7\ntrials = 5\n",
        "M = 3\nN = 60\nk = 10\nseed = 1\ntrials = 4\nmemory_mode = \"no_memory\"\np = 0.2\n[noise]\ndepolarizing = 0.1\nloss = 0.2\n[[attacks]]\nline = 2\npolicy = \"fixed_x\"\n",
        "agents = 2\nsignals = 1\ndecoys = 0\ntrials = 2\nreconstruction = \"first_last_xor\"\n",
    ];
    for text in texts {
        let cfg = config(text);
        let ndjson = run_ndjson(&cfg);
        let lines: Vec<&str> = ndjson.lines().collect();
        assert_eq!(lines.len(), cfg.trials + 2);
        for line in lines {
            let value: serde_json::Value = serde_json::from_str(line).unwrap();
            let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
            assert!(errors.is_empty(), "{line}\n{errors:?}");
            let record: ResultRecord = serde_json::from_str(line).unwrap();
            assert_eq!(serde_json::to_string(&record).unwrap(), line);
        }
    }
}

#[test]
fn schema_rejects_foreign_records() {
    let validator = schema();
    assert!(!validator.is_valid(&serde_json::json!({"record": "trial", "trial": 0})));
    assert!(!validator.is_valid(&serde_json::json!({"record": "other"})));
}

#[test]
fn honest_run_never_detects() {
    let cfg = config("agents = 2\nsignals = 200\ntrials = 100\nseed = 3\n");
    let mut out = Vec::new();
    let summary = cmd_run(&cfg, &mut out, None).unwrap();
    assert_eq!(summary.detection_frequency, 0.0);
}

#[test]
fn random_zx_run_reports_quarter_qber() {
    let cfg = config("agents = 2\nsignals = 50\ndecoys = 2000\ntrials = 20\n[[attacks]]\nline = 0\npolicy = \"random_zx\"\n");
    let oracle = expected_qber_oracle(AttackModel::InterceptResend(InterceptPolicy::RandomZx), NoiseModel::None).unwrap();
    let summary = cmd_run(&cfg, &mut Vec::new(), None).unwrap();
    assert_eq!(summary.detection_frequency, 1.0);
    assert!((summary.qber_z[0].unwrap() - oracle.z).abs() < 0.02);
    assert!((summary.qber_x[0].unwrap() - oracle.x).abs() < 0.02);
    assert_eq!(summary.qber_z[1], Some(0.0));
}

#[test]
fn csv_output_parses_back() {
    let cfg = config("agents = 2\nsignals = 40\ntrials = 6\noutput_format = \"csv\"\n");
    let mut out = Vec::new();
    cmd_run(&cfg, &mut out, None).unwrap();
    let rows: Vec<TrialRow> = csv::Reader::from_reader(out.as_slice()).deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().enumerate().all(|(i, r)| r.trial == i && !r.detected));
}

#[test]
fn p_sweep_tracks_useful_rate() {
    let cfg = config("agents = 2\nsignals = 20000\nmemory_mode = \"no_memory\"\ntrials = 2\n");
    let rows = cmd_sweep(&cfg, "p", &[0.05, 0.1, 0.2], &mut Vec::new()).unwrap();
    for row in rows {
        let expected = useful_rate(row.value, 2).unwrap();
        assert!((row.expected_sifted_fraction - expected).abs() < 1e-12);
        assert!((row.mean_sifted_fraction - expected).abs() < 0.01, "{row:?}");
    }
}

#[test]
fn agent_sweep_with_first_last_xor_agrees() {
    let cfg = config("agents = 2\nsignals = 500\nreconstruction = \"first_last_xor\"\ntrials = 3\n");
    let rows = cmd_sweep(&cfg, "M", &[2.0, 3.0, 4.0], &mut Vec::new()).unwrap();
    assert!(rows.iter().all(|r| r.mean_agreement == Some(1.0)));
}

#[test]
fn decoy_sweep_tracks_detection_oracle() {
    let cfg = config("agents = 2\nsignals = 4\neta_t = 0.0\ntrials = 4000\n[[attacks]]\nline = 1\npolicy = \"random_zx\"\n");
    let mut out = Vec::new();
    let rows = cmd_sweep(&cfg, "k", &[1.0, 5.0, 10.0], &mut out).unwrap();
    for row in &rows {
        let oracle = detection_probability_oracle(0.25, row.value as usize, 0.0);
        assert!((row.detection_frequency - oracle).abs() < 0.03, "{row:?} vs {oracle}");
    }
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("param,value,trials,detection_frequency"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn sweep_rejects_bad_input() {
    let cfg = config("agents = 2\nsignals = 10\n");
    assert!(cmd_sweep(&cfg, "bogus", &[1.0], &mut Vec::new()).is_err());
    assert!(cmd_sweep(&cfg, "p", &[0.1, 0.7], &mut Vec::new()).is_err());
    assert!(cmd_sweep(&cfg, "k", &[2.5], &mut Vec::new()).is_err());
}

#[test]
fn oracle_output() {
    let q = OracleQuery {
        attack: AttackModel::InterceptResend(InterceptPolicy::RandomZx),
        noise: NoiseModel::None,
        p: 0.1,
        agents: 2,
        decoys: 5,
        eta_t: 0.0,
        memory_mode: MemoryMode::QuantumMemory,
    };
    let text = cmd_oracle(&q).unwrap();
    assert!(text.contains("QBER_Z=0.25 QBER_X=0.25"), "{text}");
    assert!(text.contains("p_u=0.81"), "{text}");
    assert!(text.contains("P_detect=0.762695"), "{text}");
}

#[test]
fn config_errors_name_the_field() {
    let err = parse_config_str("agents = 2\nsignals = 10\nalpha = 1.0\n").unwrap_err().to_string();
    assert!(err.contains("alpha must lie in (0,1)"), "{err}");
    let err = parse_config_str("agents = 2\nsignals = 10\nbogus = 1\n").unwrap_err().to_string();
    assert!(err.contains("bogus"), "{err}");
    let err = parse_config_str("agents = 2\nsignals = \n").unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
    let warned = parse_config_str("agents = 2\nsignals = 10\np = 0.45\n").unwrap();
    assert_eq!(warned.warnings, vec!["p near 1/2 degrades efficiency".to_string()]);
}

fn qss(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qss")).args(args).output().unwrap()
}

#[test]
fn binary_run_report_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.toml");
    std::fs::write(&cfg_path, "agents = 2\nsignals = 100\ntrials = 10\n[[attacks]]\nline = 0\npolicy = \"fixed_z\"\n").unwrap();
    let out_path = dir.path().join("out.ndjson");
    let cfg = cfg_path.to_str().unwrap();
    let out = out_path.to_str().unwrap();

    let run = qss(&["run", "--config", cfg, "--seed", "5", "--output", out]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let first = std::fs::read_to_string(&out_path).unwrap();
    assert!(first.contains("\"master_seed\":5"));

    let report = qss(&["report", "--input", out]);
    assert!(report.status.success());
    assert!(String::from_utf8_lossy(&report.stdout).contains("detection:"));

    let csv_path = dir.path().join("out.csv");
    let run = qss(&["run", "--config", cfg, "--trials", "3", "--format", "csv", "--output", csv_path.to_str().unwrap()]);
    assert!(run.status.success());
    assert!(cmd_report(&csv_path).unwrap().contains("trials:      3"));

    let oracle = qss(&["oracle", "--attack", "fixed_x"]);
    assert!(String::from_utf8_lossy(&oracle.stdout).starts_with("QBER_Z=0.5 QBER_X=0\n"));
    assert!(!qss(&["oracle", "--attack", "teleport"]).status.success());

    let sweep = qss(&["sweep", "--config", cfg, "--param", "eta_t", "--values", "0.0,0.5"]);
    assert!(sweep.status.success());
    assert_eq!(String::from_utf8_lossy(&sweep.stdout).lines().count(), 3);

    std::fs::write(&cfg_path, "agents = 2\nsignals = 100\nalpha = 1.5\n").unwrap();
    let bad = qss(&["run", "--config", cfg]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("alpha"));
}
