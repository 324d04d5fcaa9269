//! The `run`, `sweep`, `oracle` and `report` commands as library functions.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, ConfigFile, OutputFormat};
use super::record::{MetaRecord, ResultRecord, TrialRecord, TrialRow};
use crate::adversary::{AttackModel, NoiseModel};
use crate::analysis::{self, AnalysisError, TrialSummary};
use crate::engine::{run_session, EngineError, MemoryMode, SessionConfig, SessionResult};
use crate::qubit::Basis;
use crate::states::SchmidtParam;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("sweep: {0}")]
    Sweep(String),
    #[error("{0}")]
    Usage(String),
    #[error("report: {0}")]
    Report(String),
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of trial `index` under `master`.
///
/// `splitmix64(master + (index + 1)·γ)` with γ the 64-bit golden-ratio
/// constant. The finalizer is a bijection and γ is odd, so distinct indices
/// always get distinct seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `trials` independent sessions in parallel, returned in trial order.
/// The config's own seed is the master seed.
pub fn run_trials(cfg: &SessionConfig, trials: usize) -> Result<Vec<SessionResult>, EngineError> {
    (0..trials)
        .into_par_iter()
        .map(|i| run_session(&SessionConfig { seed: derive_seed(cfg.seed, i as u64), ..cfg.clone() }))
        .collect()
}

/// Runs the configured trials and writes records to `out`.
pub fn cmd_run(config: &ConfigFile, out: &mut dyn Write, created_unix: Option<u64>) -> Result<TrialSummary, CommandError> {
    let results = run_trials(&config.session, config.trials)?;
    let summary = analysis::aggregate(&results)?;
    let trials: Vec<TrialRecord> = results.iter().enumerate().map(|(i, r)| TrialRecord::new(i, r)).collect();
    match config.output_format {
        OutputFormat::Json => {
            let meta = ResultRecord::Meta(MetaRecord::new(&config.session, config.trials, created_unix));
            writeln!(out, "{}", serde_json::to_string(&meta)?)?;
            for t in trials {
                writeln!(out, "{}", serde_json::to_string(&ResultRecord::Trial(t))?)?;
            }
            writeln!(out, "{}", serde_json::to_string(&ResultRecord::Summary(summary.clone()))?)?;
        }
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut *out);
            for t in &trials {
                w.serialize(TrialRow::from(t))?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(summary)
}

/// Numeric config field a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    P,
    EtaT,
    Alpha,
    Agents,
    Signals,
    Decoys,
    Depolarizing,
    Loss,
}

impl SweepParam {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "p" => SweepParam::P,
            "eta_t" | "eta-t" => SweepParam::EtaT,
            "alpha" => SweepParam::Alpha,
            "agents" | "M" => SweepParam::Agents,
            "signals" | "N" => SweepParam::Signals,
            "decoys" | "k" => SweepParam::Decoys,
            "depolarizing" | "q" => SweepParam::Depolarizing,
            "loss" | "l" => SweepParam::Loss,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::P => "p",
            SweepParam::EtaT => "eta_t",
            SweepParam::Alpha => "alpha",
            SweepParam::Agents => "agents",
            SweepParam::Signals => "signals",
            SweepParam::Decoys => "decoys",
            SweepParam::Depolarizing => "depolarizing",
            SweepParam::Loss => "loss",
        }
    }

    fn apply(self, cfg: &SessionConfig, value: f64) -> Result<SessionConfig, CommandError> {
        let bad = |why: &str| CommandError::Sweep(format!("{} = {value}: {why}", self.name()));
        let count = || {
            if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(bad("expected a non-negative integer"))
            }
        };
        let mut next = cfg.clone();
        match self {
            SweepParam::P => next.p = value,
            SweepParam::EtaT => next.eta_t = value,
            SweepParam::Alpha => next.alpha = SchmidtParam::new(value).map_err(|e| bad(&e.to_string()))?,
            SweepParam::Agents => next.agents = count()?,
            SweepParam::Signals => next.signals = count()?,
            SweepParam::Decoys => next.decoys = count()?,
            SweepParam::Depolarizing => {
                next.noise = NoiseModel::new(value, cfg.noise.loss()).map_err(|e| bad(&e.to_string()))?
            }
            SweepParam::Loss => {
                next.noise = NoiseModel::new(cfg.noise.depolarizing(), value).map_err(|e| bad(&e.to_string()))?
            }
        }
        next.validate().map_err(|e| bad(&e.to_string()))?;
        Ok(next)
    }
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub trials: usize,
    pub detection_frequency: f64,
    pub detection_stderr: f64,
    /// Worst pooled Z-group rate over lines.
    pub qber_z: Option<f64>,
    pub qber_x: Option<f64>,
    pub mean_agreement: Option<f64>,
    pub mean_eta_q: f64,
    pub mean_sifted_fraction: f64,
    /// `(1 − p)^M` without memory (1 with memory), times the survival `(1 − l)^M`.
    pub expected_sifted_fraction: f64,
    /// Mean useful decoys per line.
    pub mean_useful_decoys: f64,
    pub mean_classical_bits: f64,
}

/// Validates every sweep point up front.
pub fn sweep_configs(base: &SessionConfig, param: &str, values: &[f64]) -> Result<Vec<SessionConfig>, CommandError> {
    let param = SweepParam::parse(param).ok_or_else(|| CommandError::Sweep(format!("unknown parameter `{param}`")))?;
    if values.is_empty() {
        return Err(CommandError::Sweep("no values given".into()));
    }
    values.iter().map(|&v| param.apply(base, v)).collect()
}

fn expected_sifted(cfg: &SessionConfig) -> f64 {
    let m = cfg.agents as i32;
    let survive = (1.0 - cfg.noise.loss()).powi(m);
    match cfg.memory_mode {
        MemoryMode::QuantumMemory => survive,
        MemoryMode::NoMemory => (1.0 - cfg.p).powi(m) * survive,
    }
}

/// Runs the config's trials at every sweep value and writes a CSV table.
pub fn cmd_sweep(config: &ConfigFile, param: &str, values: &[f64], out: &mut dyn Write) -> Result<Vec<SweepRow>, CommandError> {
    let configs = sweep_configs(&config.session, param, values)?;
    let name = SweepParam::parse(param).expect("validated above").name();
    let mut rows = Vec::with_capacity(configs.len());
    for (cfg, &value) in configs.iter().zip(values) {
        let summary = analysis::aggregate(&run_trials(cfg, config.trials)?)?;
        let useful = &summary.mean_useful_decoys;
        rows.push(SweepRow {
            param: name.to_string(),
            value,
            trials: summary.trials,
            detection_frequency: summary.detection_frequency,
            detection_stderr: summary.detection_stderr,
            qber_z: summary.worst_qber(Basis::Z),
            qber_x: summary.worst_qber(Basis::X),
            mean_agreement: summary.mean_agreement,
            mean_eta_q: summary.mean_eta_q,
            mean_sifted_fraction: summary.mean_sifted_fraction,
            expected_sifted_fraction: expected_sifted(cfg),
            mean_useful_decoys: useful.iter().sum::<f64>() / useful.len() as f64,
            mean_classical_bits: summary.mean_classical_bits,
        });
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut *out);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(rows)
}

/// Inputs to the analytic predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleQuery {
    pub attack: AttackModel,
    pub noise: NoiseModel,
    pub p: f64,
    pub agents: usize,
    pub decoys: usize,
    pub eta_t: f64,
    pub memory_mode: MemoryMode,
}

/// `{:.6}` with trailing zeros removed.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

/// Prints the analytic predictions for an attacked line.
///
/// `P_detect` treats the line's expected useful decoys as one pool with the
/// mean group error rate; it is exact at `eta_t = 0`.
pub fn cmd_oracle(q: &OracleQuery) -> Result<String, CommandError> {
    let rates = analysis::expected_qber_oracle(q.attack, q.noise)?;
    let p_u = analysis::useful_rate(q.p, q.agents)?;
    let kept = q.decoys as f64 * (1.0 - q.noise.loss());
    let useful = match q.memory_mode {
        MemoryMode::QuantumMemory => kept,
        MemoryMode::NoMemory => kept / 2.0,
    };
    let detect = analysis::detection_probability_oracle(rates.mean(), useful.round() as usize, q.eta_t);
    let mut s = String::new();
    writeln!(s, "QBER_Z={} QBER_X={}", num(rates.z), num(rates.x)).unwrap();
    writeln!(s, "p_u={}", num(p_u)).unwrap();
    writeln!(s, "useful_decoys={}", num(useful)).unwrap();
    writeln!(s, "P_detect={}", num(detect)).unwrap();
    Ok(s)
}

fn config_line(cfg: &SessionConfig) -> String {
    let attacks: Vec<String> = cfg.attacks.iter().map(|a| format!("{}:{}", a.line, a.policy.name())).collect();
    format!(
        "M={} N={} k={} alpha={} p={} eta_t={} memory={} depolarizing={} loss={} attacks=[{}]",
        cfg.agents,
        cfg.signals,
        cfg.decoys,
        num(cfg.alpha.alpha()),
        num(cfg.p),
        num(cfg.eta_t),
        serde_json::to_value(cfg.memory_mode).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
        num(cfg.noise.depolarizing()),
        num(cfg.noise.loss()),
        attacks.join(",")
    )
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

fn rows_table(rows: &[TrialRow]) -> String {
    let n = rows.len() as f64;
    let f = rows.iter().filter(|r| r.detected).count() as f64 / n;
    let mean = |g: &dyn Fn(&TrialRow) -> Option<f64>| {
        let v: Vec<f64> = rows.iter().filter_map(g).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let mut s = String::new();
    writeln!(s, "trials:      {}", rows.len()).unwrap();
    writeln!(s, "detection:   {:.4} ± {:.4}", f, (f * (1.0 - f) / n).sqrt()).unwrap();
    writeln!(s, "qber_z:      {} (mean worst line)", opt(mean(&|r| r.worst_qber_z))).unwrap();
    writeln!(s, "qber_x:      {} (mean worst line)", opt(mean(&|r| r.worst_qber_x))).unwrap();
    writeln!(s, "agreement:   {}", opt(mean(&|r| r.agreement))).unwrap();
    writeln!(s, "eta_q:       {}", opt(mean(&|r| Some(r.eta_q)))).unwrap();
    writeln!(s, "sifted:      {}", opt(mean(&|r| Some(r.sifted_fraction)))).unwrap();
    s
}

/// Summary table of a `run` output file (JSON records or CSV rows).
pub fn cmd_report(path: &Path) -> Result<String, CommandError> {
    let text = std::fs::read_to_string(path)?;
    let mut s = String::new();
    writeln!(s, "input:       {}", path.display()).unwrap();
    if !text.trim_start().starts_with('{') {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<TrialRow> = reader.deserialize().collect::<Result<_, _>>()?;
        if rows.is_empty() {
            return Err(CommandError::Report("no trial rows".into()));
        }
        s.push_str(&rows_table(&rows));
        return Ok(s);
    }

    let mut meta = None;
    let mut summary = None;
    let mut trials = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let record: ResultRecord =
            serde_json::from_str(line).map_err(|e| CommandError::Report(format!("line {}: {e}", i + 1)))?;
        match record {
            ResultRecord::Meta(m) => meta = Some(m),
            ResultRecord::Trial(t) => trials.push(t),
            ResultRecord::Summary(t) => summary = Some(t),
        }
    }
    if let Some(m) = &meta {
        writeln!(s, "schema:      v{} (artifact {})", m.schema_version, m.artifact_version).unwrap();
        writeln!(s, "config:      {}", config_line(&m.config)).unwrap();
    }
    match summary {
        Some(t) => {
            writeln!(s, "trials:      {}", t.trials).unwrap();
            writeln!(s, "detection:   {:.4} ± {:.4}", t.detection_frequency, t.detection_stderr).unwrap();
            writeln!(s, "line  qber_z   qber_x   useful").unwrap();
            for line in 0..t.qber_z.len() {
                writeln!(s, "{:<5} {:<8} {:<8} {:.1}", line, opt(t.qber_z[line]), opt(t.qber_x[line]), t.mean_useful_decoys[line])
                    .unwrap();
            }
            writeln!(s, "agreement:   {}", opt(t.mean_agreement)).unwrap();
            writeln!(s, "eta_q:       {:.4}", t.mean_eta_q).unwrap();
            writeln!(s, "sifted:      {:.4}", t.mean_sifted_fraction).unwrap();
            writeln!(s, "classical:   {:.1} bits", t.mean_classical_bits).unwrap();
        }
        None if !trials.is_empty() => {
            let rows: Vec<TrialRow> = trials.iter().map(TrialRow::from).collect();
            s.push_str(&rows_table(&rows));
        }
        None => return Err(CommandError::Report("no trial or summary records".into())),
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::InterceptPolicy;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
        assert_ne!(derive_seed(42, 3), derive_seed(43, 3));
    }

    #[test]
    fn number_formatting() {
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(0.81), "0.81");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(2.0 * 0.06 / 3.0), "0.04");
    }

    #[test]
    fn oracle_output() {
        let base = OracleQuery {
            attack: AttackModel::InterceptResend(InterceptPolicy::RandomZx),
            noise: NoiseModel::None,
            p: 0.1,
            agents: 2,
            decoys: 5,
            eta_t: 0.0,
            memory_mode: MemoryMode::QuantumMemory,
        };
        let out = cmd_oracle(&base).unwrap();
        assert!(out.starts_with("QBER_Z=0.25 QBER_X=0.25\n"), "{out}");
        assert!(out.contains("P_detect=0.762695"), "{out}");
        let out = cmd_oracle(&OracleQuery { attack: AttackModel::None, ..base }).unwrap();
        assert!(out.contains("p_u=0.81\n"));
        assert!(out.contains("P_detect=0\n"));
        let out = cmd_oracle(&OracleQuery { attack: AttackModel::InterceptResend(InterceptPolicy::FixedX), ..base }).unwrap();
        assert!(out.starts_with("QBER_Z=0.5 QBER_X=0\n"));
    }

    #[test]
    fn sweep_validation() {
        let base = SessionConfig::new(2, 100, 1);
        assert!(matches!(sweep_configs(&base, "bogus", &[1.0]), Err(CommandError::Sweep(_))));
        assert!(sweep_configs(&base, "p", &[0.1, 0.6]).is_err());
        assert!(sweep_configs(&base, "agents", &[2.5]).is_err());
        assert!(sweep_configs(&base, "alpha", &[1.0]).is_err());
        let cfgs = sweep_configs(&base, "k", &[1.0, 5.0]).unwrap();
        assert_eq!(cfgs.iter().map(|c| c.decoys).collect::<Vec<_>>(), vec![1, 5]);
        let cfgs = sweep_configs(&base, "depolarizing", &[0.0, 0.1]).unwrap();
        assert_eq!(cfgs[1].noise, NoiseModel::Depolarizing(0.1));
    }
}
