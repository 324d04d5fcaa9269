//! Efficiency and cost metrics, Monte-Carlo aggregation, and closed-form
//! oracles for decoy error rates and detection probability.
//!
//! The oracles never touch the state-vector simulator: error rates come from
//! an enumeration over decoy kinds, attacker branches and Pauli errors using
//! the analytic overlaps between Z and X eigenstates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{AttackModel, InterceptPolicy, NoiseModel};
use crate::engine::{MemoryMode, SessionConfig, SessionResult};
use crate::qubit::Basis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("cannot aggregate an empty result list")]
    Empty,
    #[error("result {0} was produced by a different configuration")]
    MixedConfigs(usize),
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain { name: &'static str, value: f64, domain: &'static str },
}

/// `η_q = q_u / q_t`.
pub fn intrinsic_efficiency(result: &SessionResult) -> f64 {
    result.q_u as f64 / result.q_t as f64
}

/// Fraction of signal rounds every agent measures in Z: `(1 − p)^M`.
pub fn useful_rate(p: f64, agents: usize) -> Result<f64, AnalysisError> {
    if !(0.0..1.0).contains(&p) {
        return Err(AnalysisError::Domain { name: "p", value: p, domain: "[0, 1)" });
    }
    if agents < 2 {
        return Err(AnalysisError::Domain { name: "agents", value: agents as f64, domain: "M >= 2" });
    }
    Ok((1.0 - p).powi(agents as i32))
}

/// Expected error rates of useful decoys in the Z and X groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    pub z: f64,
    pub x: f64,
}

impl GroupRates {
    pub fn get(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Z => self.z,
            Basis::X => self.x,
        }
    }

    /// Average over uniformly drawn decoy kinds.
    pub fn mean(&self) -> f64 {
        (self.z + self.x) / 2.0
    }
}

/// `|⟨a,v|b,w⟩|²` for eigenstates of Z and X.
fn overlap_sq(a: Basis, v: u8, b: Basis, w: u8) -> f64 {
    if a != b {
        0.5
    } else if v == w {
        1.0
    } else {
        0.0
    }
}

/// Bit flip a Pauli (1 = X, 2 = Y, 3 = Z) induces on an eigenstate of `basis`.
fn pauli_flips(pauli: usize, basis: Basis) -> u8 {
    match (pauli, basis) {
        (2, _) | (1, Basis::Z) | (3, Basis::X) => 1,
        _ => 0,
    }
}

/// Exact matched-basis decoy error rates under an attack followed by noise.
///
/// Loss only removes photons, so it leaves the conditional rates unchanged.
pub fn expected_qber_oracle(attack: AttackModel, noise: NoiseModel) -> Result<GroupRates, AnalysisError> {
    let q = noise.depolarizing();
    let l = noise.loss();
    for (name, value) in [("depolarizing", q), ("loss", l)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(AnalysisError::Domain { name, value, domain: "[0, 1]" });
        }
    }
    let attacker_bases: Vec<(Basis, f64)> = match attack {
        AttackModel::None => vec![],
        AttackModel::InterceptResend(InterceptPolicy::FixedZ) => vec![(Basis::Z, 1.0)],
        AttackModel::InterceptResend(InterceptPolicy::FixedX) => vec![(Basis::X, 1.0)],
        AttackModel::InterceptResend(InterceptPolicy::RandomZx) => vec![(Basis::Z, 0.5), (Basis::X, 0.5)],
    };
    let paulis = [(0usize, 1.0 - q), (1, q / 3.0), (2, q / 3.0), (3, q / 3.0)];

    let group_rate = |group: Basis| {
        let mut err = 0.0;
        for prepared in [0u8, 1] {
            // States arriving at the noise stage, with weights.
            let mut arriving: Vec<(Basis, u8, f64)> = Vec::new();
            if attacker_bases.is_empty() {
                arriving.push((group, prepared, 1.0));
            }
            for &(eb, pe) in &attacker_bases {
                for o in [0u8, 1] {
                    let w = pe * overlap_sq(group, prepared, eb, o);
                    if w > 0.0 {
                        arriving.push((eb, o, w));
                    }
                }
            }
            for (b, v, w) in arriving {
                for &(pauli, pp) in &paulis {
                    let v2 = v ^ pauli_flips(pauli, b);
                    let wrong = 1.0 - overlap_sq(group, prepared, b, v2);
                    err += 0.5 * w * pp * wrong;
                }
            }
        }
        err
    };
    Ok(GroupRates { z: group_rate(Basis::Z), x: group_rate(Basis::X) })
}

/// Largest error count whose rate `errors / n` still passes `≤ eta_t`.
fn max_passing_errors(n: usize, eta_t: f64) -> usize {
    let mut c = ((eta_t * n as f64).floor() as usize).min(n);
    while c > 0 && c as f64 / n as f64 > eta_t {
        c -= 1;
    }
    while c < n && (c + 1) as f64 / n as f64 <= eta_t {
        c += 1;
    }
    c
}

/// Probability that `useful` decoys with per-photon error probability
/// `error` show a rate above `eta_t` (binomial upper tail).
pub fn detection_probability_oracle(error: f64, useful: usize, eta_t: f64) -> f64 {
    if useful == 0 || error <= 0.0 {
        return 0.0;
    }
    let allowed = max_passing_errors(useful, eta_t);
    if allowed >= useful {
        return 0.0;
    }
    if error >= 1.0 {
        return 1.0;
    }
    let n = useful as f64;
    let (ln_e, ln_1e) = (error.ln(), (-error).ln_1p());
    let mut ln_choose = 0.0;
    let mut pass = 0.0;
    for c in 0..=allowed {
        if c > 0 {
            ln_choose += (n - (c - 1) as f64).ln() - (c as f64).ln();
        }
        pass += (ln_choose + c as f64 * ln_e + (n - c as f64) * ln_1e).exp();
    }
    (1.0 - pass).clamp(0.0, 1.0)
}

fn ceil_log2(x: usize) -> u64 {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as u64
    }
}

/// Classical bits exchanged in one session.
///
/// Per line: decoy positions (`k·⌈log₂(N+k)⌉`), decoy states (`2k`) and one
/// pass/fail bit. Without memory every agent also announces one basis bit
/// per slot.
pub fn classical_cost(cfg: &SessionConfig) -> u64 {
    let m = cfg.agents as u64;
    let k = cfg.decoys as u64;
    let per_line = k * ceil_log2(cfg.slots_per_line()) + 2 * k + 1;
    let bases = match cfg.memory_mode {
        MemoryMode::QuantumMemory => 0,
        MemoryMode::NoMemory => cfg.total_qubits(),
    };
    m * per_line + bases
}

/// Headline numbers of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub eta_q: f64,
    /// Measured sifted fraction of signal rounds.
    pub useful_rate: f64,
    /// Per line, `(Z-group rate, X-group rate)`.
    pub qber: Vec<(f64, f64)>,
    pub detection: bool,
    pub agreement: Option<f64>,
    pub classical_bits: u64,
}

impl Metrics {
    pub fn of(result: &SessionResult) -> Self {
        Metrics {
            eta_q: intrinsic_efficiency(result),
            useful_rate: result.sifted_fraction(),
            qber: result.check.lines.iter().map(|l| (l.z_group.rate, l.x_group.rate)).collect(),
            detection: result.detected,
            agreement: result.agreement(),
            classical_bits: result.classical_bits,
        }
    }
}

/// Aggregate over Monte-Carlo trials of one configuration.
///
/// Group error rates are pooled (total errors over total tested decoys);
/// the detection standard error is the binomial `√(f(1−f)/n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub detection_frequency: f64,
    pub detection_stderr: f64,
    /// Per line pooled Z-group rate; `None` if no Z decoy was ever useful.
    pub qber_z: Vec<Option<f64>>,
    pub qber_x: Vec<Option<f64>>,
    /// Mean agreement over trials that released a non-empty key.
    pub mean_agreement: Option<f64>,
    pub mean_eta_q: f64,
    pub mean_sifted_fraction: f64,
    /// Per line mean count of useful decoys.
    pub mean_useful_decoys: Vec<f64>,
    pub mean_classical_bits: f64,
}

impl TrialSummary {
    /// Largest pooled rate over lines, for single-column tables.
    pub fn worst_qber(&self, basis: Basis) -> Option<f64> {
        let rates = match basis {
            Basis::Z => &self.qber_z,
            Basis::X => &self.qber_x,
        };
        rates.iter().flatten().copied().reduce(f64::max)
    }
}

fn same_experiment(a: &SessionConfig, b: &SessionConfig) -> bool {
    SessionConfig { seed: 0, ..a.clone() } == SessionConfig { seed: 0, ..b.clone() }
}

pub fn aggregate(results: &[SessionResult]) -> Result<TrialSummary, AnalysisError> {
    let first = results.first().ok_or(AnalysisError::Empty)?;
    if let Some(i) = results.iter().position(|r| !same_experiment(&r.config, &first.config)) {
        return Err(AnalysisError::MixedConfigs(i));
    }
    let n = results.len() as f64;
    let lines = first.config.agents;
    let detections = results.iter().filter(|r| r.detected).count() as f64;
    let f = detections / n;

    let pooled = |pick: fn(&crate::engine::LineCheck) -> (usize, usize)| -> Vec<Option<f64>> {
        (0..lines)
            .map(|line| {
                let (tested, errors) = results.iter().map(|r| pick(&r.check.lines[line])).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
                (tested > 0).then(|| errors as f64 / tested as f64)
            })
            .collect()
    };
    let agreements: Vec<f64> = results.iter().filter_map(|r| r.agreement()).collect();
    let mean = |it: &mut dyn Iterator<Item = f64>| it.sum::<f64>() / n;

    Ok(TrialSummary {
        trials: results.len(),
        detection_frequency: f,
        detection_stderr: (f * (1.0 - f) / n).sqrt(),
        qber_z: pooled(|l| (l.z_group.tested, l.z_group.errors)),
        qber_x: pooled(|l| (l.x_group.tested, l.x_group.errors)),
        mean_agreement: (!agreements.is_empty()).then(|| agreements.iter().sum::<f64>() / agreements.len() as f64),
        mean_eta_q: mean(&mut results.iter().map(intrinsic_efficiency)),
        mean_sifted_fraction: mean(&mut results.iter().map(|r| r.sifted_fraction())),
        mean_useful_decoys: (0..lines)
            .map(|line| mean(&mut results.iter().map(|r| r.check.lines[line].useful_decoys() as f64)))
            .collect(),
        mean_classical_bits: mean(&mut results.iter().map(|r| r.classical_bits as f64)),
    })
}
