//! Versioned result records.
//!
//! A `run` in JSON format emits one `meta` record, one `trial` record per
//! session in trial order, then one `summary` record, each on its own line.
//! `meta.created_unix` is the only field that depends on wall-clock time.
//! The schema lives in `schema/result-record.v1.json`.

use serde::{Deserialize, Serialize};

use crate::analysis::{intrinsic_efficiency, TrialSummary};
use crate::engine::{LineCheck, SessionConfig, SessionResult};
use crate::qubit::Basis;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ResultRecord {
    Meta(MetaRecord),
    Trial(TrialRecord),
    Summary(TrialSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaRecord {
    pub schema_version: u32,
    pub artifact_version: String,
    /// Seconds since the Unix epoch at emission time.
    pub created_unix: Option<u64>,
    pub master_seed: u64,
    pub trials: usize,
    pub config: SessionConfig,
}

impl MetaRecord {
    pub fn new(config: &SessionConfig, trials: usize, created_unix: Option<u64>) -> Self {
        MetaRecord {
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix,
            master_seed: config.seed,
            trials,
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    pub z_tested: usize,
    pub z_errors: usize,
    pub z_rate: f64,
    pub z_inconclusive: bool,
    pub x_tested: usize,
    pub x_errors: usize,
    pub x_rate: f64,
    pub x_inconclusive: bool,
    pub received_decoys: usize,
    pub lost_decoys: usize,
    pub pass: bool,
}

impl From<&LineCheck> for LineRecord {
    fn from(l: &LineCheck) -> Self {
        LineRecord {
            z_tested: l.z_group.tested,
            z_errors: l.z_group.errors,
            z_rate: l.z_group.rate,
            z_inconclusive: l.z_group.inconclusive,
            x_tested: l.x_group.tested,
            x_errors: l.x_group.errors,
            x_rate: l.x_group.rate,
            x_inconclusive: l.x_group.inconclusive,
            received_decoys: l.received_decoys,
            lost_decoys: l.lost_decoys,
            pass: l.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub detected: bool,
    pub sifted_rounds: usize,
    pub sifted_fraction: f64,
    pub q_u: u64,
    pub q_t: u64,
    pub eta_q: f64,
    pub agreement: Option<f64>,
    pub key_length: usize,
    pub classical_bits: u64,
    pub lines: Vec<LineRecord>,
}

impl TrialRecord {
    pub fn new(trial: usize, result: &SessionResult) -> Self {
        TrialRecord {
            trial,
            seed: result.config.seed,
            detected: result.detected,
            sifted_rounds: result.sifted_rounds,
            sifted_fraction: result.sifted_fraction(),
            q_u: result.q_u,
            q_t: result.q_t,
            eta_q: intrinsic_efficiency(result),
            agreement: result.agreement(),
            key_length: result.key.as_ref().map_or(0, |k| k.boss.len()),
            classical_bits: result.classical_bits,
            lines: result.check.lines.iter().map(LineRecord::from).collect(),
        }
    }

    fn worst(&self, basis: Basis) -> Option<f64> {
        self.lines
            .iter()
            .filter_map(|l| match basis {
                Basis::Z => (!l.z_inconclusive).then_some(l.z_rate),
                Basis::X => (!l.x_inconclusive).then_some(l.x_rate),
            })
            .reduce(f64::max)
    }
}

/// Flat per-trial row for CSV output. Group rates are the worst over lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub detected: bool,
    pub sifted_rounds: usize,
    pub sifted_fraction: f64,
    pub q_u: u64,
    pub q_t: u64,
    pub eta_q: f64,
    pub agreement: Option<f64>,
    pub classical_bits: u64,
    pub worst_qber_z: Option<f64>,
    pub worst_qber_x: Option<f64>,
    pub useful_decoys: usize,
}

impl From<&TrialRecord> for TrialRow {
    fn from(r: &TrialRecord) -> Self {
        TrialRow {
            trial: r.trial,
            seed: r.seed,
            detected: r.detected,
            sifted_rounds: r.sifted_rounds,
            sifted_fraction: r.sifted_fraction,
            q_u: r.q_u,
            q_t: r.q_t,
            eta_q: r.eta_q,
            agreement: r.agreement,
            classical_bits: r.classical_bits,
            worst_qber_z: r.worst(Basis::Z),
            worst_qber_x: r.worst(Basis::X),
            useful_decoys: r.lines.iter().map(|l| l.z_tested + l.x_tested).sum(),
        }
    }
}
