//! Protocol states: the four signal kinds, their M-party forms, the coding
//! rule, and measure-and-rotate decoy preparation.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubit::{Basis, Gate, QubitError, StateVector, MAX_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("alpha must lie in (0,1), got {0}")]
    InvalidAlpha(f64),
    #[error("agent count must lie in [2, {MAX_QUBITS}], got {0}")]
    InvalidPartyCount(usize),
    #[error(transparent)]
    Qubit(#[from] QubitError),
}

/// Real Schmidt coefficients `α|0…⟩ + β|1…⟩` with `α² + β² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SchmidtParam {
    alpha: f64,
    beta: f64,
}

impl SchmidtParam {
    /// Rejects the product-state endpoints 0 and 1.
    pub fn new(alpha: f64) -> Result<Self, StateError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(StateError::InvalidAlpha(alpha));
        }
        Ok(SchmidtParam { alpha, beta: (1.0 - alpha * alpha).sqrt() })
    }

    /// The maximally entangled point `α = β = 1/√2`.
    pub fn maximal() -> Self {
        SchmidtParam { alpha: std::f64::consts::FRAC_1_SQRT_2, beta: std::f64::consts::FRAC_1_SQRT_2 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl TryFrom<f64> for SchmidtParam {
    type Error = StateError;
    fn try_from(alpha: f64) -> Result<Self, Self::Error> {
        SchmidtParam::new(alpha)
    }
}

impl From<SchmidtParam> for f64 {
    fn from(s: SchmidtParam) -> f64 {
        s.alpha
    }
}

/// Signal kind of an entangled system.
///
/// For two parties these are `φ = α|00⟩+β|11⟩`, `φ′ = α|11⟩+β|00⟩`,
/// `ψ = α|01⟩+β|10⟩` and `ψ′ = α|10⟩+β|01⟩`. The M-party forms keep the
/// leading M−1 qubits equal and set the last qubit equal to them (φ, φ′) or
/// flipped (ψ, ψ′).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairKind {
    Phi,
    PhiPrime,
    Psi,
    PsiPrime,
}

/// Same four kinds read as M-qubit states.
pub type MultiKind = PairKind;

impl PairKind {
    pub const ALL: [PairKind; 4] = [PairKind::Phi, PairKind::PhiPrime, PairKind::Psi, PairKind::PsiPrime];

    /// Classical bit carried by the kind: φ, φ′ → 0; ψ, ψ′ → 1.
    pub fn code_bit(self) -> u8 {
        match self {
            PairKind::Phi | PairKind::PhiPrime => 0,
            PairKind::Psi | PairKind::PsiPrime => 1,
        }
    }

    /// Local flips `(B, C)` that turn φ into this kind.
    pub fn local_ops(self) -> (Gate, Gate) {
        match self {
            PairKind::Phi => (Gate::IDENTITY, Gate::IDENTITY),
            PairKind::PhiPrime => (Gate::FLIP, Gate::FLIP),
            PairKind::Psi => (Gate::IDENTITY, Gate::FLIP),
            PairKind::PsiPrime => (Gate::FLIP, Gate::IDENTITY),
        }
    }

    fn primed(self) -> bool {
        matches!(self, PairKind::PhiPrime | PairKind::PsiPrime)
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairKind::Phi => "phi",
            PairKind::PhiPrime => "phi'",
            PairKind::Psi => "psi",
            PairKind::PsiPrime => "psi'",
        })
    }
}

/// Classical bit carried by a signal kind.
pub fn code_bit(kind: PairKind) -> u8 {
    kind.code_bit()
}

/// Two-qubit signal state written out directly.
pub fn pair_state(kind: PairKind, s: SchmidtParam) -> StateVector {
    multiparty_state(kind, s, 2).expect("two parties are always in range")
}

/// Two-qubit signal state built from `φ` by local unitaries.
pub fn pair_from_ops(kind: PairKind, s: SchmidtParam) -> StateVector {
    let mut state = pair_state(PairKind::Phi, s);
    let (b, c) = kind.local_ops();
    state.apply_gate_mut(&b, 0).expect("qubit 0 exists");
    state.apply_gate_mut(&c, 1).expect("qubit 1 exists");
    state
}

/// M-qubit signal state `α|a⟩ + β|b⟩` with the support strings set by `kind`.
pub fn multiparty_state(kind: MultiKind, s: SchmidtParam, parties: usize) -> Result<StateVector, StateError> {
    if !(2..=MAX_QUBITS).contains(&parties) {
        return Err(StateError::InvalidPartyCount(parties));
    }
    let all = (1usize << parties) - 1;
    // Leading string of the α term: all zeros, or all ones when primed.
    let mut lead = if kind.primed() { all } else { 0 };
    if kind.code_bit() == 1 {
        lead ^= 1;
    }
    let trail = lead ^ all;
    let mut amps = vec![0.0; 1 << parties];
    amps[lead] = s.alpha();
    amps[trail] = s.beta();
    Ok(StateVector::from_real(&amps)?)
}

/// Single-photon decoy state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoyKind {
    Z0,
    Z1,
    XPlus,
    XMinus,
}

impl DecoyKind {
    pub const ALL: [DecoyKind; 4] = [DecoyKind::Z0, DecoyKind::Z1, DecoyKind::XPlus, DecoyKind::XMinus];

    /// Basis the decoy is an eigenstate of.
    pub fn basis(self) -> Basis {
        match self {
            DecoyKind::Z0 | DecoyKind::Z1 => Basis::Z,
            DecoyKind::XPlus | DecoyKind::XMinus => Basis::X,
        }
    }

    /// Outcome an ideal measurement in [`DecoyKind::basis`] returns.
    pub fn bit(self) -> u8 {
        match self {
            DecoyKind::Z0 | DecoyKind::XPlus => 0,
            DecoyKind::Z1 | DecoyKind::XMinus => 1,
        }
    }

    pub fn state(self) -> StateVector {
        StateVector::eigenstate(self.basis(), self.bit()).expect("single-qubit eigenstate")
    }
}

/// Gates applied left to right to the photon kept after measuring its partner.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionProgram(Vec<Gate>);

impl CorrectionProgram {
    pub fn gates(&self) -> &[Gate] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, state: &mut StateVector, qubit: usize) -> Result<(), QubitError> {
        for g in &self.0 {
            state.apply_gate_mut(g, qubit)?;
        }
        Ok(())
    }
}

/// Correction for photon C after photon B of `φ` was measured in Z with `measured_bit`.
///
/// Photon C is left in `|measured_bit⟩`; the program rotates it to `target`.
pub fn correction_program(target: DecoyKind, measured_bit: u8) -> CorrectionProgram {
    use DecoyKind::*;
    let gates = match (target, measured_bit) {
        (Z0, 0) | (Z1, 1) => vec![],
        (Z0, _) | (Z1, _) => vec![Gate::FLIP],
        (XPlus, 0) | (XMinus, 1) => vec![Gate::HADAMARD],
        (XPlus, _) | (XMinus, _) => vec![Gate::FLIP, Gate::HADAMARD],
    };
    CorrectionProgram(gates)
}

/// Prepares a decoy by measuring photon B of `φ(α)` in Z and rotating photon C.
pub fn prepare_decoy<R: Rng + ?Sized>(target: DecoyKind, s: SchmidtParam, rng: &mut R) -> Result<StateVector, StateError> {
    let mut source = pair_state(PairKind::Phi, s);
    let outcome = source.measure_mut(0, Basis::Z, rng)?;
    // The collapsed pair is |b⟩_B ⊗ |χ⟩_C; read photon C off the B = b half.
    let offset = (outcome as usize) << 1;
    let mut photon = StateVector::from_amplitudes(vec![source.amplitude(offset), source.amplitude(offset | 1)])?;
    correction_program(target, outcome).apply(&mut photon, 0)?;
    Ok(photon)
}

/// Decoy preparation with the partner-measurement branch fixed.
pub fn prepare_decoy_from_branch(target: DecoyKind, measured_bit: u8) -> Result<StateVector, StateError> {
    let mut photon = StateVector::basis_ket(&[measured_bit])?;
    correction_program(target, measured_bit).apply(&mut photon, 0)?;
    Ok(photon)
}
