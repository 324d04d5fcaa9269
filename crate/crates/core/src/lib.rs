//! Simulator and analysis toolkit for multiparty quantum secret sharing with
//! pure (non-maximally) entangled states and decoy photons.
//!
//! A boss prepares `N` entangled systems, each in one of four pure states
//! `α|0…0⟩ + β|1…1⟩`-style superpositions, sends photon `i` of every system
//! to agent `i`, and hides `k` single-photon decoys in every line. The decoys
//! expose intercept-resend attacks (by an outsider or a dishonest agent); the
//! Z outcomes of the signal photons combine into the boss's key.
//!
//! Modules, bottom up:
//!
//! - [`qubit`]: dense state vectors, single-qubit gates, Z/X measurement.
//! - [`states`]: the four signal kinds, their M-party forms, decoy preparation.
//! - [`adversary`]: intercept-resend attacks, depolarizing noise and loss.
//! - [`engine`]: one complete session from preparation to distilled keys.
//! - [`analysis`]: efficiency and cost metrics, aggregation, analytic oracles.
//! - [`io`]: config files, seeded trial runs, sweeps and result records.
//!
//! ```
//! use qss::engine::{run_session, SessionConfig};
//!
//! let cfg = SessionConfig::new(2, 200, 7);
//! let result = run_session(&cfg).unwrap();
//! assert!(!result.detected);
//! assert_eq!(result.agreement(), Some(1.0));
//! ```

pub mod adversary;
pub mod analysis;
pub mod engine;
pub mod io;
pub mod qubit;
pub mod states;

pub use adversary::{AttackModel, InterceptPolicy, NoiseModel};
pub use engine::{run_session, MemoryMode, ReconstructionRule, SessionConfig, SessionResult};
pub use qubit::{Basis, Gate, StateVector};
pub use states::{DecoyKind, PairKind, SchmidtParam};
