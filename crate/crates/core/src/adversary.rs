//! Transit threats: intercept-resend eavesdropping and channel noise.
//!
//! A dishonest agent attacking its co-agent is modelled the same way as an
//! external eavesdropper: an intercept-resend placement on the victim's line.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubit::{Basis, Gate, QubitError, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("{name} probability must lie in [0,1], got {value}")]
    OutOfRange { name: &'static str, value: f64 },
}

/// Basis choice of an intercept-resend attacker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterceptPolicy {
    FixedZ,
    FixedX,
    /// Fresh uniform basis per photon.
    RandomZx,
}

impl InterceptPolicy {
    pub fn name(self) -> &'static str {
        match self {
            InterceptPolicy::FixedZ => "fixed_z",
            InterceptPolicy::FixedX => "fixed_x",
            InterceptPolicy::RandomZx => "random_zx",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "fixed_z" | "fixedz" | "z" => Some(InterceptPolicy::FixedZ),
            "fixed_x" | "fixedx" | "x" => Some(InterceptPolicy::FixedX),
            "random_zx" | "randomzx" | "random" => Some(InterceptPolicy::RandomZx),
            _ => None,
        }
    }

    fn choose<R: Rng + ?Sized>(self, rng: &mut R) -> Basis {
        match self {
            InterceptPolicy::FixedZ => Basis::Z,
            InterceptPolicy::FixedX => Basis::X,
            InterceptPolicy::RandomZx => {
                if rng.random::<bool>() {
                    Basis::X
                } else {
                    Basis::Z
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AttackModel {
    #[default]
    None,
    InterceptResend(InterceptPolicy),
}

/// Stochastic channel noise applied after any attack.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "NoiseSpec", into = "NoiseSpec")]
pub enum NoiseModel {
    #[default]
    None,
    Depolarizing(f64),
    Loss(f64),
    Both { depolarizing: f64, loss: f64 },
}

/// Flat form of [`NoiseModel`] used in config files and records.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub depolarizing: f64,
    #[serde(default)]
    pub loss: f64,
}

impl NoiseModel {
    pub fn new(depolarizing: f64, loss: f64) -> Result<Self, NoiseError> {
        check_probability("depolarizing", depolarizing)?;
        check_probability("loss", loss)?;
        Ok(match (depolarizing > 0.0, loss > 0.0) {
            (false, false) => NoiseModel::None,
            (true, false) => NoiseModel::Depolarizing(depolarizing),
            (false, true) => NoiseModel::Loss(loss),
            (true, true) => NoiseModel::Both { depolarizing, loss },
        })
    }

    pub fn depolarizing(&self) -> f64 {
        match *self {
            NoiseModel::Depolarizing(q) | NoiseModel::Both { depolarizing: q, .. } => q,
            _ => 0.0,
        }
    }

    pub fn loss(&self) -> f64 {
        match *self {
            NoiseModel::Loss(l) | NoiseModel::Both { loss: l, .. } => l,
            _ => 0.0,
        }
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(NoiseError::OutOfRange { name, value })
    }
}

impl TryFrom<NoiseSpec> for NoiseModel {
    type Error = NoiseError;
    fn try_from(spec: NoiseSpec) -> Result<Self, Self::Error> {
        NoiseModel::new(spec.depolarizing, spec.loss)
    }
}

impl From<NoiseModel> for NoiseSpec {
    fn from(model: NoiseModel) -> Self {
        NoiseSpec { depolarizing: model.depolarizing(), loss: model.loss() }
    }
}

/// One qubit in flight: either a lone decoy photon or one member of a joint
/// signal state owned by the engine.
pub struct TransitQubit<'a> {
    pub state: &'a mut StateVector,
    pub qubit: usize,
}

impl<'a> TransitQubit<'a> {
    pub fn new(state: &'a mut StateVector, qubit: usize) -> Self {
        TransitQubit { state, qubit }
    }
}

/// What the attacker saw on one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interception {
    pub basis: Basis,
    pub outcome: u8,
}

/// Measures the transit qubit in the policy basis and forwards the eigenstate.
///
/// The projective measurement leaves the qubit in exactly the eigenstate the
/// attacker would resend, and collapses any partner photons of a joint state.
pub fn eve_intercept<R: Rng + ?Sized>(
    photon: TransitQubit<'_>,
    policy: InterceptPolicy,
    rng: &mut R,
) -> Result<Interception, QubitError> {
    let basis = policy.choose(rng);
    let outcome = photon.state.measure_mut(photon.qubit, basis, rng)?;
    Ok(Interception { basis, outcome })
}

/// With probability `q` applies X, Y or Z (q/3 each).
pub fn apply_depolarizing<R: Rng + ?Sized>(photon: TransitQubit<'_>, q: f64, rng: &mut R) -> Result<Option<Gate>, QubitError> {
    if q <= 0.0 || rng.random::<f64>() >= q {
        return Ok(None);
    }
    let gate = match rng.random_range(0..3) {
        0 => Gate::FLIP,
        1 => Gate::PAULI_Y,
        _ => Gate::PAULI_Z,
    };
    photon.state.apply_gate_mut(&gate, photon.qubit)?;
    Ok(Some(gate))
}

/// Returns `true` if the photon is lost, with probability `l`.
pub fn apply_loss<R: Rng + ?Sized>(l: f64, rng: &mut R) -> bool {
    l > 0.0 && rng.random::<f64>() < l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::DecoyKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_z_on_z_eigenstate_is_silent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let mut s = DecoyKind::Z1.state();
            let seen = eve_intercept(TransitQubit::new(&mut s, 0), InterceptPolicy::FixedZ, &mut rng).unwrap();
            assert_eq!(seen, Interception { basis: Basis::Z, outcome: 1 });
            assert_eq!(s, DecoyKind::Z1.state());
        }
    }

    #[test]
    fn resent_state_is_eigenstate_of_attack_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut ones = 0;
        let n = 20_000;
        for _ in 0..n {
            let mut s = DecoyKind::XPlus.state();
            let seen = eve_intercept(TransitQubit::new(&mut s, 0), InterceptPolicy::FixedZ, &mut rng).unwrap();
            let p = s.born_probability(0, Basis::Z, seen.outcome).unwrap();
            assert!((p - 1.0).abs() < 1e-12);
            ones += seen.outcome as usize;
        }
        let f = ones as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((f - 0.5).abs() < 3.0 * sigma, "{f}");
    }

    #[test]
    fn zero_noise_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = DecoyKind::XMinus.state();
        for _ in 0..1000 {
            assert!(apply_depolarizing(TransitQubit::new(&mut s, 0), 0.0, &mut rng).unwrap().is_none());
            assert!(!apply_loss(0.0, &mut rng));
        }
        assert_eq!(s, DecoyKind::XMinus.state());
    }

    #[test]
    fn full_depolarizing_flips_z_two_thirds() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 30_000;
        let mut flips = 0;
        for _ in 0..n {
            let mut s = StateVector::basis_ket(&[0]).unwrap();
            apply_depolarizing(TransitQubit::new(&mut s, 0), 1.0, &mut rng).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            flips += s.measure_mut(0, Basis::Z, &mut rng).unwrap() as usize;
        }
        let f = flips as f64 / n as f64;
        let sigma = (2.0 / 9.0 / n as f64).sqrt();
        assert!((f - 2.0 / 3.0).abs() < 3.0 * sigma, "{f}");
    }

    #[test]
    fn loss_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 100_000;
        let lost = (0..n).filter(|_| apply_loss(0.2, &mut rng)).count();
        let sigma = (0.16 / n as f64).sqrt();
        assert!((lost as f64 / n as f64 - 0.2).abs() < 3.0 * sigma);
    }

    #[test]
    fn noise_model_validation() {
        assert_eq!(NoiseModel::new(0.0, 0.0).unwrap(), NoiseModel::None);
        assert_eq!(NoiseModel::new(0.1, 0.0).unwrap(), NoiseModel::Depolarizing(0.1));
        assert_eq!(NoiseModel::new(0.0, 0.2).unwrap(), NoiseModel::Loss(0.2));
        assert!(matches!(NoiseModel::new(0.1, 0.2).unwrap(), NoiseModel::Both { .. }));
        assert!(NoiseModel::new(1.5, 0.0).is_err());
        assert!(NoiseModel::new(0.0, -0.1).is_err());
    }

    #[test]
    fn policy_names_round_trip() {
        for p in [InterceptPolicy::FixedZ, InterceptPolicy::FixedX, InterceptPolicy::RandomZx] {
            assert_eq!(InterceptPolicy::parse(p.name()), Some(p));
        }
        assert_eq!(InterceptPolicy::parse("breidbart"), None);
    }
}
