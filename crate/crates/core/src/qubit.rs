//! Dense pure-state simulation of small qubit registers.
//!
//! Qubit 0 is the leftmost symbol of a ket and the most significant bit of
//! the amplitude index: in `|01⟩` qubit 0 is `0`, qubit 1 is `1`, and the
//! amplitude lives at index `0b01`.
//!
//! Measurement in the X basis is implemented as Hadamard conjugation of a
//! Z measurement, so there is a single projection code path.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Complex probability amplitude.
pub type Amplitude = Complex64;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 16;

/// Tolerance for norm and unitarity checks.
pub const NORM_TOLERANCE: f64 = 1e-12;

const ZERO: Amplitude = Complex64::new(0.0, 0.0);
const ONE: Amplitude = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QubitError {
    #[error("a register needs at least one qubit")]
    Empty,
    #[error("{0} qubits exceeds the register cap of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("basis bit values must be 0 or 1, got {0}")]
    InvalidBit(u8),
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("gate is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("amplitudes must be finite")]
    NonFinite,
    #[error("projection onto outcome {0} has zero probability")]
    ZeroProbabilityProjection(u8),
}

/// Measuring basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    /// Computational basis `{|0⟩, |1⟩}`.
    Z,
    /// Diagonal basis `{|+x⟩, |−x⟩}`; outcome 0 is `|+x⟩`.
    X,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Z, Basis::X];
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Z => f.write_str("Z"),
            Basis::X => f.write_str("X"),
        }
    }
}

/// Unitary 2×2 single-qubit gate, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    m: [[Amplitude; 2]; 2],
}

impl Gate {
    /// Identity, `|0⟩⟨0| + |1⟩⟨1|`.
    pub const IDENTITY: Gate = Gate { m: [[ONE, ZERO], [ZERO, ONE]] };
    /// Bit flip, `|1⟩⟨0| + |0⟩⟨1|` (Pauli X).
    pub const FLIP: Gate = Gate { m: [[ZERO, ONE], [ONE, ZERO]] };
    pub const HADAMARD: Gate = Gate {
        m: [
            [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
            [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0)],
        ],
    };
    pub const PAULI_Y: Gate = Gate {
        m: [[ZERO, Complex64::new(0.0, -1.0)], [Complex64::new(0.0, 1.0), ZERO]],
    };
    pub const PAULI_Z: Gate = Gate { m: [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]] };

    /// Builds a gate from a row-major matrix, rejecting non-unitary input.
    pub fn new(m: [[Amplitude; 2]; 2]) -> Result<Self, QubitError> {
        let gate = Gate { m };
        let dev = gate.unitarity_deviation();
        if !dev.is_finite() || dev >= NORM_TOLERANCE {
            return Err(QubitError::NotUnitary(dev));
        }
        Ok(gate)
    }

    pub fn matrix(&self) -> [[Amplitude; 2]; 2] {
        self.m
    }

    /// `max |(G†G − I)_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = ZERO;
                for k in 0..2 {
                    acc += self.m[k][i].conj() * self.m[k][j];
                }
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }
}

/// Normalized pure state of `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Amplitude>,
}

fn check_width(n: usize) -> Result<(), QubitError> {
    match n {
        0 => Err(QubitError::Empty),
        n if n > MAX_QUBITS => Err(QubitError::TooManyQubits(n)),
        _ => Ok(()),
    }
}

impl StateVector {
    /// Computational-basis product state; `bits[0]` is qubit 0.
    pub fn basis_ket(bits: &[u8]) -> Result<Self, QubitError> {
        check_width(bits.len())?;
        let mut index = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(QubitError::InvalidBit(b));
            }
            index = (index << 1) | b as usize;
        }
        let mut amplitudes = vec![ZERO; 1 << bits.len()];
        amplitudes[index] = ONE;
        Ok(StateVector { num_qubits: bits.len(), amplitudes })
    }

    /// `|0⟩`, `|1⟩`, `|+x⟩` or `|−x⟩` on a single qubit.
    pub fn eigenstate(basis: Basis, bit: u8) -> Result<Self, QubitError> {
        let ket = Self::basis_ket(&[bit])?;
        match basis {
            Basis::Z => Ok(ket),
            Basis::X => ket.apply_gate(&Gate::HADAMARD, 0),
        }
    }

    /// Wraps raw amplitudes, validating length, finiteness and norm.
    pub fn from_amplitudes(amplitudes: Vec<Amplitude>) -> Result<Self, QubitError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QubitError::BadLength(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_width(num_qubits)?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QubitError::NonFinite);
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QubitError::NotNormalized(norm));
        }
        Ok(StateVector { num_qubits, amplitudes })
    }

    /// Builds a state from real amplitudes.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self, QubitError> {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Amplitude {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Kronecker product `self ⊗ other`; `self` supplies the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, QubitError> {
        check_width(self.num_qubits + other.num_qubits)?;
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(StateVector { num_qubits: self.num_qubits + other.num_qubits, amplitudes })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Amplitude {
        assert_eq!(self.num_qubits, other.num_qubits, "inner product of mismatched registers");
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|`, which is 1 for states equal up to global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), QubitError> {
        if qubit >= self.num_qubits {
            return Err(QubitError::QubitOutOfRange { qubit, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    pub fn apply_gate(&self, gate: &Gate, qubit: usize) -> Result<StateVector, QubitError> {
        let mut out = self.clone();
        out.apply_gate_mut(gate, qubit)?;
        Ok(out)
    }

    /// In-place variant of [`StateVector::apply_gate`].
    pub fn apply_gate_mut(&mut self, gate: &Gate, qubit: usize) -> Result<(), QubitError> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        let m = gate.m;
        for i in 0..self.amplitudes.len() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
            self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(())
    }

    fn z_probability(&self, qubit: usize, outcome: u8) -> f64 {
        let mask = self.mask(qubit);
        let want = if outcome == 0 { 0 } else { mask };
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Probability of `outcome` when measuring `qubit` in `basis`.
    pub fn born_probability(&self, qubit: usize, basis: Basis, outcome: u8) -> Result<f64, QubitError> {
        self.check_qubit(qubit)?;
        if outcome > 1 {
            return Err(QubitError::InvalidBit(outcome));
        }
        let p = match basis {
            Basis::Z => self.z_probability(qubit, outcome),
            Basis::X => self.apply_gate(&Gate::HADAMARD, qubit)?.z_probability(qubit, outcome),
        };
        Ok(p.clamp(0.0, 1.0))
    }

    /// Projective measurement returning the outcome and the collapsed state.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        qubit: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<(u8, StateVector), QubitError> {
        let mut out = self.clone();
        let outcome = out.measure_mut(qubit, basis, rng)?;
        Ok((outcome, out))
    }

    /// In-place variant of [`StateVector::measure`].
    pub fn measure_mut<R: Rng + ?Sized>(
        &mut self,
        qubit: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<u8, QubitError> {
        self.check_qubit(qubit)?;
        if basis == Basis::X {
            self.apply_gate_mut(&Gate::HADAMARD, qubit)?;
        }
        let p0 = self.z_probability(qubit, 0);
        let outcome = if rng.random::<f64>() < p0 { 0 } else { 1 };
        self.project_z(qubit, outcome)?;
        if basis == Basis::X {
            self.apply_gate_mut(&Gate::HADAMARD, qubit)?;
        }
        Ok(outcome)
    }

    fn project_z(&mut self, qubit: usize, outcome: u8) -> Result<(), QubitError> {
        let mask = self.mask(qubit);
        let keep = if outcome == 0 { 0 } else { mask };
        let mut norm = 0.0;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == keep {
                norm += a.norm_sqr();
            } else {
                *a = ZERO;
            }
        }
        if norm <= f64::EPSILON {
            return Err(QubitError::ZeroProbabilityProjection(outcome));
        }
        let scale = 1.0 / norm.sqrt();
        for a in &mut self.amplitudes {
            *a *= scale;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn phi(alpha: f64) -> StateVector {
        let beta = (1.0 - alpha * alpha).sqrt();
        StateVector::from_real(&[alpha, 0.0, 0.0, beta]).unwrap()
    }

    #[test]
    fn basis_kets() {
        let k = StateVector::basis_ket(&[0]).unwrap();
        assert_eq!(k.amplitudes(), &[ONE, ZERO]);
        let k = StateVector::basis_ket(&[0, 1]).unwrap();
        assert_eq!(k.amplitude(0b01), ONE);
        assert_eq!(k.num_qubits(), 2);
        let k = StateVector::basis_ket(&[1, 1, 1]).unwrap();
        assert!(approx(k.norm_sqr(), 1.0));
        assert_eq!(k.amplitude(7), ONE);
    }

    #[test]
    fn basis_ket_rejects_bad_widths() {
        assert_eq!(StateVector::basis_ket(&[]), Err(QubitError::Empty));
        assert_eq!(StateVector::basis_ket(&[0; 17]), Err(QubitError::TooManyQubits(17)));
        assert_eq!(StateVector::basis_ket(&[2]), Err(QubitError::InvalidBit(2)));
    }

    #[test]
    fn tensor_products() {
        let zero = StateVector::basis_ket(&[0]).unwrap();
        let one = StateVector::basis_ket(&[1]).unwrap();
        assert_eq!(zero.tensor(&one).unwrap(), StateVector::basis_ket(&[0, 1]).unwrap());

        let plus = StateVector::eigenstate(Basis::X, 0).unwrap();
        let t = plus.tensor(&zero).unwrap();
        let expected = StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0]).unwrap();
        assert!((t.overlap(&expected) - 1.0).abs() < 1e-12);

        let big = StateVector::basis_ket(&[0; 9]).unwrap();
        assert_eq!(big.tensor(&big), Err(QubitError::TooManyQubits(18)));
    }

    #[test]
    fn gate_actions() {
        let zero = StateVector::basis_ket(&[0]).unwrap();
        assert_eq!(zero.apply_gate(&Gate::FLIP, 0).unwrap(), StateVector::basis_ket(&[1]).unwrap());
        let plus = zero.apply_gate(&Gate::HADAMARD, 0).unwrap();
        assert!(approx(plus.amplitude(0).re, FRAC_1_SQRT_2));
        assert!(approx(plus.amplitude(1).re, FRAC_1_SQRT_2));
        assert!(matches!(
            zero.apply_gate(&Gate::FLIP, 1),
            Err(QubitError::QubitOutOfRange { qubit: 1, num_qubits: 1 })
        ));
    }

    #[test]
    fn gate_constants_are_unitary() {
        for g in [Gate::IDENTITY, Gate::FLIP, Gate::HADAMARD, Gate::PAULI_Y, Gate::PAULI_Z] {
            assert!(g.unitarity_deviation() < NORM_TOLERANCE);
        }
    }

    #[test]
    fn non_unitary_gates_are_rejected() {
        let m = [[ONE, ONE], [ZERO, ONE]];
        assert!(matches!(Gate::new(m), Err(QubitError::NotUnitary(_))));
        assert!(Gate::new(Gate::HADAMARD.matrix()).is_ok());
    }

    #[test]
    fn from_amplitudes_validation() {
        assert_eq!(StateVector::from_real(&[1.0, 0.0, 0.0]), Err(QubitError::BadLength(3)));
        assert!(matches!(StateVector::from_real(&[1.0, 1.0]), Err(QubitError::NotNormalized(_))));
        assert_eq!(StateVector::from_real(&[f64::NAN, 0.0]), Err(QubitError::NonFinite));
    }

    #[test]
    fn born_probabilities() {
        // Z outcome 1 on qubit C of phi(0.6): only |11⟩ contributes, 0.8² = 0.64.
        let s = phi(0.6);
        assert!(approx(s.born_probability(1, Basis::Z, 1).unwrap(), 0.64));
        let plus = StateVector::eigenstate(Basis::X, 0).unwrap();
        assert!(approx(plus.born_probability(0, Basis::Z, 0).unwrap(), 0.5));
        let s = phi(FRAC_1_SQRT_2);
        assert!(approx(s.born_probability(0, Basis::X, 0).unwrap(), 0.5));
        assert!(s.born_probability(2, Basis::Z, 0).is_err());
    }

    #[test]
    fn measurement_collapses() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let one = StateVector::basis_ket(&[1]).unwrap();
        for _ in 0..100 {
            let (o, post) = one.measure(0, Basis::Z, &mut rng).unwrap();
            assert_eq!(o, 1);
            assert_eq!(post, one);
        }
        let s = phi(0.6);
        for _ in 0..200 {
            let (o, post) = s.measure(0, Basis::Z, &mut rng).unwrap();
            let c = post.born_probability(1, Basis::Z, o).unwrap();
            assert!(approx(c, 1.0));
        }
    }

    #[test]
    fn projection_onto_impossible_outcome_is_a_fault() {
        let mut k = StateVector::basis_ket(&[0]).unwrap();
        assert_eq!(k.project_z(0, 1), Err(QubitError::ZeroProbabilityProjection(1)));
    }
}
