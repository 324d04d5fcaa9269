//! Session orchestration: sequence preparation, transit, agent measurement,
//! the two-group decoy check and key distillation.
//!
//! The engine owns every entangled signal system. Line `i` carries qubit `i`
//! of each joint state, so a measurement by any party (agent or attacker)
//! collapses the one shared copy.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{self, AttackModel, InterceptPolicy, NoiseModel, TransitQubit};
use crate::analysis;
use crate::qubit::{Basis, QubitError, StateVector, MAX_QUBITS};
use crate::states::{self, DecoyKind, PairKind, SchmidtParam, StateError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid `{field}`: {message}")]
    InvalidConfig { field: &'static str, message: String },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Qubit(#[from] QubitError),
}

fn invalid(field: &'static str, message: impl Into<String>) -> EngineError {
    EngineError::InvalidConfig { field, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMode {
    /// Agents hold photons until decoy positions and states are announced.
    #[default]
    QuantumMemory,
    /// Agents measure on arrival, choosing X with probability `p`.
    NoMemory,
}

/// How the agents' Z outcomes are combined to recover the boss's key bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructionRule {
    /// XOR of every agent's bit.
    #[default]
    FullParity,
    /// XOR of the first and last agent's bits.
    FirstLastXor,
}

/// Intercept-resend attack on one agent's line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackPlacement {
    pub line: usize,
    pub policy: InterceptPolicy,
}

pub const DEFAULT_P: f64 = 0.1;
pub const DEFAULT_ETA_T: f64 = 0.05;
/// Above this X-basis probability a warning is emitted.
pub const P_WARN_THRESHOLD: f64 = 0.4;

/// Default decoy count per line: `max(32, ⌈0.05·N⌉)`.
pub fn default_decoys(signals: usize) -> usize {
    32.max((signals as f64 * 0.05).ceil() as usize)
}

/// Every protocol parameter of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Number of agents M (one line each).
    pub agents: usize,
    /// Number of entangled signal systems N.
    pub signals: usize,
    /// Decoy photons inserted into each line, k.
    pub decoys: usize,
    pub alpha: SchmidtParam,
    /// Probability of measuring in X without quantum memory.
    pub p: f64,
    /// Per-group error-rate threshold; a group passes when its rate is `≤ eta_t`.
    pub eta_t: f64,
    pub memory_mode: MemoryMode,
    pub attacks: Vec<AttackPlacement>,
    pub noise: NoiseModel,
    pub reconstruction: ReconstructionRule,
    pub seed: u64,
}

impl SessionConfig {
    /// Config with the documented defaults for everything but M, N and the seed.
    pub fn new(agents: usize, signals: usize, seed: u64) -> Self {
        SessionConfig {
            agents,
            signals,
            decoys: default_decoys(signals),
            alpha: SchmidtParam::new(0.6).expect("0.6 is a valid alpha"),
            p: DEFAULT_P,
            eta_t: DEFAULT_ETA_T,
            memory_mode: MemoryMode::QuantumMemory,
            attacks: Vec::new(),
            noise: NoiseModel::None,
            reconstruction: ReconstructionRule::FullParity,
            seed,
        }
    }

    /// Checks every field, returning advisory warnings on success.
    pub fn validate(&self) -> Result<Vec<String>, EngineError> {
        let mut warnings = Vec::new();
        if !(2..=MAX_QUBITS).contains(&self.agents) {
            return Err(invalid("agents", format!("must lie in [2, {MAX_QUBITS}], got {}", self.agents)));
        }
        if self.signals == 0 {
            return Err(invalid("signals", "must be at least 1"));
        }
        if !(0.0..0.5).contains(&self.p) {
            return Err(invalid("p", format!("must lie in [0, 0.5), got {}", self.p)));
        }
        if self.p > P_WARN_THRESHOLD {
            warnings.push("p near 1/2 degrades efficiency".to_string());
        }
        if !(0.0..=0.5).contains(&self.eta_t) {
            return Err(invalid("eta_t", format!("must lie in [0, 0.5], got {}", self.eta_t)));
        }
        let mut seen = vec![false; self.agents];
        for a in &self.attacks {
            if a.line >= self.agents {
                return Err(invalid("attacks", format!("line {} does not exist with {} agents", a.line, self.agents)));
            }
            if std::mem::replace(&mut seen[a.line], true) {
                return Err(invalid("attacks", format!("line {} has more than one attack", a.line)));
            }
        }
        let slots = self.signals.checked_add(self.decoys);
        if slots.and_then(|s| s.checked_mul(self.agents)).is_none() {
            return Err(invalid("decoys", "slot count overflows"));
        }
        Ok(warnings)
    }

    pub fn attack_on(&self, line: usize) -> AttackModel {
        self.attacks
            .iter()
            .find(|a| a.line == line)
            .map(|a| AttackModel::InterceptResend(a.policy))
            .unwrap_or(AttackModel::None)
    }

    /// Slots per line, `N + k`.
    pub fn slots_per_line(&self) -> usize {
        self.signals + self.decoys
    }

    /// Total transmitted qubits `q_t = M·(N + k)`.
    pub fn total_qubits(&self) -> u64 {
        (self.agents * self.slots_per_line()) as u64
    }
}

/// What Alice placed in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotTag {
    Signal(usize),
    Decoy(DecoyKind),
}

/// Alice's secret bookkeeping for one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceLayout {
    /// Per line, the slot tags in transit order.
    pub lines: Vec<Vec<SlotTag>>,
    /// Per line, sorted decoy positions.
    pub decoy_positions: Vec<Vec<usize>>,
    /// Per line, slot position of each signal index.
    pub signal_positions: Vec<Vec<usize>>,
    pub signal_kinds: Vec<PairKind>,
}

impl SequenceLayout {
    pub fn agents(&self) -> usize {
        self.lines.len()
    }

    pub fn code_bits(&self) -> Vec<u8> {
        self.signal_kinds.iter().map(|k| k.code_bit()).collect()
    }
}

/// A photon in a line as seen at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub enum PhotonSlot {
    /// Handle into the engine's joint-state store.
    Signal { index: usize },
    Decoy { kind: DecoyKind, state: StateVector },
    Lost,
}

/// All quantum data of a session: joint signal states plus every line's slots.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStore {
    pub joint: Vec<StateVector>,
    pub lines: Vec<Vec<PhotonSlot>>,
}

impl PhotonStore {
    /// Borrow the qubit a slot refers to, or `None` if it was lost.
    pub fn transit_qubit(&mut self, line: usize, pos: usize) -> Option<TransitQubit<'_>> {
        match &mut self.lines[line][pos] {
            PhotonSlot::Signal { index } => Some(TransitQubit::new(&mut self.joint[*index], line)),
            PhotonSlot::Decoy { state, .. } => Some(TransitQubit::new(state, 0)),
            PhotonSlot::Lost => None,
        }
    }
}

/// Prepares the N signal systems and k decoys per line, then interleaves them.
pub fn build_sequences<R: Rng + ?Sized>(cfg: &SessionConfig, rng: &mut R) -> Result<(SequenceLayout, PhotonStore), EngineError> {
    cfg.validate()?;
    let m = cfg.agents;
    let n = cfg.signals;
    let slots = cfg.slots_per_line();

    let mut signal_kinds = Vec::with_capacity(n);
    let mut joint = Vec::with_capacity(n);
    for _ in 0..n {
        let kind = PairKind::ALL[rng.random_range(0..4)];
        joint.push(states::multiparty_state(kind, cfg.alpha, m)?);
        signal_kinds.push(kind);
    }

    let mut layout_lines = Vec::with_capacity(m);
    let mut decoy_positions = Vec::with_capacity(m);
    let mut signal_positions = Vec::with_capacity(m);
    let mut store_lines = Vec::with_capacity(m);
    for _ in 0..m {
        let mut positions = index::sample(rng, slots, cfg.decoys).into_vec();
        positions.sort_unstable();
        let mut is_decoy = vec![false; slots];
        for &p in &positions {
            is_decoy[p] = true;
        }
        let mut tags = Vec::with_capacity(slots);
        let mut photons = Vec::with_capacity(slots);
        let mut sig_pos = Vec::with_capacity(n);
        for (pos, decoy) in is_decoy.into_iter().enumerate() {
            if decoy {
                let kind = DecoyKind::ALL[rng.random_range(0..4)];
                let state = states::prepare_decoy(kind, cfg.alpha, rng)?;
                tags.push(SlotTag::Decoy(kind));
                photons.push(PhotonSlot::Decoy { kind, state });
            } else {
                let index = sig_pos.len();
                sig_pos.push(pos);
                tags.push(SlotTag::Signal(index));
                photons.push(PhotonSlot::Signal { index });
            }
        }
        layout_lines.push(tags);
        decoy_positions.push(positions);
        signal_positions.push(sig_pos);
        store_lines.push(photons);
    }

    let layout = SequenceLayout { lines: layout_lines, decoy_positions, signal_positions, signal_kinds };
    Ok((layout, PhotonStore { joint, lines: store_lines }))
}

/// Sends every line through its attack and then the channel noise.
pub fn transmit<R: Rng + ?Sized>(mut store: PhotonStore, cfg: &SessionConfig, rng: &mut R) -> Result<PhotonStore, EngineError> {
    let q = cfg.noise.depolarizing();
    let l = cfg.noise.loss();
    for line in 0..store.lines.len() {
        let attack = cfg.attack_on(line);
        for pos in 0..store.lines[line].len() {
            let Some(photon) = store.transit_qubit(line, pos) else { continue };
            if let AttackModel::InterceptResend(policy) = attack {
                adversary::eve_intercept(photon, policy, rng)?;
            }
            if q > 0.0 {
                let photon = store.transit_qubit(line, pos).expect("slot still present");
                adversary::apply_depolarizing(photon, q, rng)?;
            }
            if adversary::apply_loss(l, rng) {
                store.lines[line][pos] = PhotonSlot::Lost;
            }
        }
    }
    Ok(store)
}

/// One agent's view of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotRecord {
    Measured { basis: Basis, outcome: u8 },
    Lost,
}

impl SlotRecord {
    pub fn basis(&self) -> Option<Basis> {
        match self {
            SlotRecord::Measured { basis, .. } => Some(*basis),
            SlotRecord::Lost => None,
        }
    }
}

/// Per-slot records of one agent, indexed by slot position.
pub type AgentRecord = Vec<SlotRecord>;

fn measure_lines<R, F>(store: &mut PhotonStore, rng: &mut R, mut choose: F) -> Result<Vec<AgentRecord>, EngineError>
where
    R: Rng + ?Sized,
    F: FnMut(usize, usize, &mut R) -> Basis,
{
    let mut records = Vec::with_capacity(store.lines.len());
    for line in 0..store.lines.len() {
        let mut record = Vec::with_capacity(store.lines[line].len());
        for pos in 0..store.lines[line].len() {
            let basis = choose(line, pos, rng);
            match store.transit_qubit(line, pos) {
                None => record.push(SlotRecord::Lost),
                Some(photon) => {
                    let outcome = photon.state.measure_mut(photon.qubit, basis, rng)?;
                    record.push(SlotRecord::Measured { basis, outcome });
                }
            }
        }
        records.push(record);
    }
    Ok(records)
}

/// Measurement after the decoy announcement: decoys in their preparation
/// basis, every signal photon in Z.
pub fn measure_with_memory<R: Rng + ?Sized>(store: &mut PhotonStore, layout: &SequenceLayout, rng: &mut R) -> Result<Vec<AgentRecord>, EngineError> {
    measure_lines(store, rng, |line, pos, _| match layout.lines[line][pos] {
        SlotTag::Decoy(kind) => kind.basis(),
        SlotTag::Signal(_) => Basis::Z,
    })
}

/// Measurement on arrival: X with probability `p`, else Z, for every slot.
pub fn measure_no_memory<R: Rng + ?Sized>(store: &mut PhotonStore, p: f64, rng: &mut R) -> Result<Vec<AgentRecord>, EngineError> {
    measure_lines(store, rng, |_, _, rng| if p > 0.0 && rng.random::<f64>() < p { Basis::X } else { Basis::Z })
}

/// Error statistics of one decoy group on one line.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupStats {
    pub tested: usize,
    pub errors: usize,
    pub rate: f64,
    /// No useful decoys landed in this group; it passes vacuously.
    pub inconclusive: bool,
}

impl GroupStats {
    fn from_counts(tested: usize, errors: usize) -> Self {
        GroupStats {
            tested,
            errors,
            rate: if tested == 0 { 0.0 } else { errors as f64 / tested as f64 },
            inconclusive: tested == 0,
        }
    }

    pub fn passes(&self, eta_t: f64) -> bool {
        self.rate <= eta_t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCheck {
    pub z_group: GroupStats,
    pub x_group: GroupStats,
    /// Decoys that reached the agent.
    pub received_decoys: usize,
    pub lost_decoys: usize,
    pub pass: bool,
}

impl LineCheck {
    pub fn useful_decoys(&self) -> usize {
        self.z_group.tested + self.x_group.tested
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub lines: Vec<LineCheck>,
    pub pass: bool,
}

/// Splits useful decoys into Z and X groups per line and compares each rate
/// against `eta_t`. Lost decoys count toward neither group.
pub fn eavesdropping_check(layout: &SequenceLayout, records: &[AgentRecord], eta_t: f64) -> CheckReport {
    let lines: Vec<LineCheck> = layout
        .decoy_positions
        .iter()
        .zip(&layout.lines)
        .zip(records)
        .map(|((positions, tags), record)| {
            let mut counts = [(0usize, 0usize); 2];
            let mut lost = 0;
            for &pos in positions {
                let SlotTag::Decoy(kind) = tags[pos] else { unreachable!("decoy position holds a signal") };
                match record[pos] {
                    SlotRecord::Lost => lost += 1,
                    SlotRecord::Measured { basis, outcome } if basis == kind.basis() => {
                        let group = &mut counts[(basis == Basis::X) as usize];
                        group.0 += 1;
                        group.1 += (outcome != kind.bit()) as usize;
                    }
                    SlotRecord::Measured { .. } => {}
                }
            }
            let z_group = GroupStats::from_counts(counts[0].0, counts[0].1);
            let x_group = GroupStats::from_counts(counts[1].0, counts[1].1);
            LineCheck {
                z_group,
                x_group,
                received_decoys: positions.len() - lost,
                lost_decoys: lost,
                pass: z_group.passes(eta_t) && x_group.passes(eta_t),
            }
        })
        .collect();
    let pass = lines.iter().all(|l| l.pass);
    CheckReport { lines, pass }
}

/// Signal indices where every agent measured Z and nothing was lost.
pub fn sift(layout: &SequenceLayout, records: &[AgentRecord]) -> Vec<usize> {
    (0..layout.signal_kinds.len())
        .filter(|&j| {
            layout
                .signal_positions
                .iter()
                .zip(records)
                .all(|(positions, record)| record[positions[j]].basis() == Some(Basis::Z))
        })
        .collect()
}

/// Distilled keys of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistilledKey {
    /// Boss's key: the code bit of every sifted round.
    pub boss: Vec<u8>,
    /// Each agent's raw Z outcomes on the sifted rounds.
    pub agents: Vec<Vec<u8>>,
    /// Key bits the agents reconstruct jointly.
    pub reconstructed: Vec<u8>,
    /// Fraction of sifted rounds where the reconstruction equals the boss's bit;
    /// `None` when nothing was sifted.
    pub agreement: Option<f64>,
}

pub fn distill(layout: &SequenceLayout, records: &[AgentRecord], rule: ReconstructionRule) -> DistilledKey {
    let sifted = sift(layout, records);
    let outcome = |line: usize, j: usize| match records[line][layout.signal_positions[line][j]] {
        SlotRecord::Measured { outcome, .. } => outcome,
        SlotRecord::Lost => unreachable!("sifted rounds have no lost photons"),
    };
    let m = layout.agents();
    let boss: Vec<u8> = sifted.iter().map(|&j| layout.signal_kinds[j].code_bit()).collect();
    let agents: Vec<Vec<u8>> = (0..m).map(|i| sifted.iter().map(|&j| outcome(i, j)).collect()).collect();
    let reconstructed: Vec<u8> = (0..sifted.len())
        .map(|r| match rule {
            ReconstructionRule::FullParity => agents.iter().fold(0, |acc, key| acc ^ key[r]),
            ReconstructionRule::FirstLastXor => agents[0][r] ^ agents[m - 1][r],
        })
        .collect();
    let agreement = if sifted.is_empty() {
        None
    } else {
        let hits = boss.iter().zip(&reconstructed).filter(|(a, b)| a == b).count();
        Some(hits as f64 / sifted.len() as f64)
    };
    DistilledKey { boss, agents, reconstructed, agreement }
}

/// Outcome of one complete session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub config: SessionConfig,
    /// Some line failed the decoy check; no key is released.
    pub detected: bool,
    pub check: CheckReport,
    pub sifted_rounds: usize,
    /// Useful qubits: `M · sifted_rounds`.
    pub q_u: u64,
    /// Transmitted qubits: `M · (N + k)`.
    pub q_t: u64,
    pub classical_bits: u64,
    /// Present only when the check passed.
    pub key: Option<DistilledKey>,
}

impl SessionResult {
    pub fn agreement(&self) -> Option<f64> {
        self.key.as_ref().and_then(|k| k.agreement)
    }

    pub fn sifted_fraction(&self) -> f64 {
        self.sifted_rounds as f64 / self.config.signals as f64
    }
}

/// Runs one complete session with the config's seed.
pub fn run_session(cfg: &SessionConfig) -> Result<SessionResult, EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    run_session_with(cfg, &mut rng)
}

/// Runs a session drawing randomness from `rng`.
pub fn run_session_with<R: Rng + ?Sized>(cfg: &SessionConfig, rng: &mut R) -> Result<SessionResult, EngineError> {
    let (layout, store) = build_sequences(cfg, rng)?;
    let mut received = transmit(store, cfg, rng)?;
    let records = match cfg.memory_mode {
        MemoryMode::QuantumMemory => measure_with_memory(&mut received, &layout, rng)?,
        MemoryMode::NoMemory => measure_no_memory(&mut received, cfg.p, rng)?,
    };
    let check = eavesdropping_check(&layout, &records, cfg.eta_t);
    let sifted_rounds = sift(&layout, &records).len();
    let key = check.pass.then(|| distill(&layout, &records, cfg.reconstruction));
    Ok(SessionResult {
        config: cfg.clone(),
        detected: !check.pass,
        check,
        sifted_rounds,
        q_u: (cfg.agents * sifted_rounds) as u64,
        q_t: cfg.total_qubits(),
        classical_bits: analysis::classical_cost(cfg),
        key,
    })
}
