//! Property and statistical tests for the state-vector core.
//!
//! Expected probabilities come from `oracle_probability`, which projects the
//! raw amplitude array onto explicit `|0⟩,|1⟩,|±x⟩` vectors and never calls
//! the simulator's gate or measurement code.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use proptest::prelude::*;
use qss::qubit::{Basis, Gate, StateVector, NORM_TOLERANCE};
use qss::states::{pair_state, PairKind, SchmidtParam};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn basis_vector(basis: Basis, outcome: u8) -> [Complex64; 2] {
    let c = |x: f64| Complex64::new(x, 0.0);
    match (basis, outcome) {
        (Basis::Z, 0) => [c(1.0), c(0.0)],
        (Basis::Z, _) => [c(0.0), c(1.0)],
        (Basis::X, 0) => [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
        (Basis::X, _) => [c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)],
    }
}

/// `Σ_rest |Σ_b ⟨e|b⟩ ψ(…b…)|²` by direct enumeration.
fn oracle_probability(amps: &[Complex64], n: usize, qubit: usize, basis: Basis, outcome: u8) -> f64 {
    let e = basis_vector(basis, outcome);
    let shift = n - 1 - qubit;
    let mut total = 0.0;
    for rest in 0..(1usize << n) {
        if (rest >> shift) & 1 == 1 {
            continue;
        }
        let a = e[0].conj() * amps[rest] + e[1].conj() * amps[rest | (1 << shift)];
        total += a.norm_sqr();
    }
    total
}

/// Joint X⊗X outcome probabilities of a two-qubit state.
fn oracle_xx(amps: &[Complex64]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for (b, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let eb = basis_vector(Basis::X, b as u8);
            let ec = basis_vector(Basis::X, c as u8);
            let mut a = Complex64::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    a += eb[i].conj() * ec[j].conj() * amps[(i << 1) | j];
                }
            }
            *cell = a.norm_sqr();
        }
    }
    out
}

fn within_3_sigma(hits: usize, n: usize, p: f64) -> bool {
    let f = hits as f64 / n as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (f - p).abs() <= 3.0 * sigma + 1e-12
}

fn arb_state(max_qubits: usize) -> impl Strategy<Value = StateVector> {
    (1..=max_qubits).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("zero vector", |v| {
            let norm: f64 = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            if norm < 1e-3 {
                return None;
            }
            let amps = v.into_iter().map(|(a, b)| Complex64::new(a / norm, b / norm)).collect();
            StateVector::from_amplitudes(amps).ok()
        })
    })
}

fn arb_gate() -> impl Strategy<Value = Gate> {
    prop::sample::select(vec![Gate::IDENTITY, Gate::FLIP, Gate::HADAMARD, Gate::PAULI_Y, Gate::PAULI_Z])
}

proptest! {
    #[test]
    fn norm_is_conserved(state in arb_state(5), ops in prop::collection::vec((arb_gate(), 0usize..5, any::<bool>(), any::<bool>()), 0..12), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = state;
        let n = s.num_qubits();
        for (g, q, measure, x) in ops {
            let q = q % n;
            if measure {
                let basis = if x { Basis::X } else { Basis::Z };
                s = s.measure(q, basis, &mut rng).unwrap().1;
            } else {
                s = s.apply_gate(&g, q).unwrap();
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
        }
    }

    #[test]
    fn flip_is_an_involution(state in arb_state(4), q in 0usize..4) {
        let q = q % state.num_qubits();
        let twice = state.apply_gate(&Gate::FLIP, q).unwrap().apply_gate(&Gate::FLIP, q).unwrap();
        for (a, b) in twice.amplitudes().iter().zip(state.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn born_matches_projector_oracle(state in arb_state(4), q in 0usize..4) {
        let n = state.num_qubits();
        let q = q % n;
        for basis in Basis::ALL {
            let mut sum = 0.0;
            for o in [0, 1] {
                let p = state.born_probability(q, basis, o).unwrap();
                prop_assert!((p - oracle_probability(state.amplitudes(), n, q, basis, o)).abs() < 1e-12);
                sum += p;
            }
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_preserves_norm(a in arb_state(3), b in arb_state(3)) {
        let t = a.tensor(&b).unwrap();
        prop_assert_eq!(t.num_qubits(), a.num_qubits() + b.num_qubits());
        prop_assert!((t.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
    }

    #[test]
    fn remeasurement_is_idempotent(state in arb_state(3), q in 0usize..3, x in any::<bool>(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = q % state.num_qubits();
        let basis = if x { Basis::X } else { Basis::Z };
        let (first, post) = state.measure(q, basis, &mut rng).unwrap();
        prop_assert!((post.born_probability(q, basis, first).unwrap() - 1.0).abs() < 1e-12);
        for _ in 0..5 {
            prop_assert_eq!(post.measure(q, basis, &mut rng).unwrap().0, first);
        }
    }

    #[test]
    fn z_parity_is_deterministic(alpha in 0.01f64..0.99, k in 0usize..4, seed in any::<u64>()) {
        let kind = PairKind::ALL[k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = pair_state(kind, SchmidtParam::new(alpha).unwrap());
        let (b, post) = s.measure(0, Basis::Z, &mut rng).unwrap();
        let (c, _) = post.measure(1, Basis::Z, &mut rng).unwrap();
        prop_assert_eq!(b ^ c, kind.code_bit());
    }
}

#[test]
fn exported_gates_are_unitary() {
    for g in [Gate::IDENTITY, Gate::FLIP, Gate::HADAMARD, Gate::PAULI_Y, Gate::PAULI_Z] {
        assert!(g.unitarity_deviation() < 1e-12);
    }
}

#[test]
fn born_frequencies_within_three_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000;
    for alpha in [0.6, FRAC_1_SQRT_2, 0.8] {
        let s = SchmidtParam::new(alpha).unwrap();
        for kind in PairKind::ALL {
            let state = pair_state(kind, s);
            for qubit in 0..2 {
                for basis in Basis::ALL {
                    let p1 = oracle_probability(state.amplitudes(), 2, qubit, basis, 1);
                    let ones: usize = (0..n).map(|_| state.measure(qubit, basis, &mut rng).unwrap().0 as usize).sum();
                    assert!(within_3_sigma(ones, n, p1), "{kind} alpha={alpha} q{qubit} {basis}: {ones}/{n} vs {p1}");
                }
            }
        }
    }
}

#[test]
fn x_basis_correlation_law() {
    for alpha in [0.3, 0.6, FRAC_1_SQRT_2, 0.8, 0.9] {
        let s = SchmidtParam::new(alpha).unwrap();
        let state = pair_state(PairKind::Phi, s);
        let xx = oracle_xx(state.amplitudes());
        let equal = xx[0][0] + xx[1][1];
        let unequal = xx[0][1] + xx[1][0];
        assert!((equal - (alpha + s.beta()).powi(2) / 2.0).abs() < 1e-12);
        assert!((unequal - (alpha - s.beta()).powi(2) / 2.0).abs() < 1e-12);
        assert!((equal + unequal - 1.0).abs() < 1e-12);
    }
}

#[test]
fn x_anticorrelation_at_alpha_08() {
    // |α − β|²/2 = (0.8 − 0.6)²/2 = 0.02.
    let state = pair_state(PairKind::Phi, SchmidtParam::new(0.8).unwrap());
    let expected = {
        let xx = oracle_xx(state.amplitudes());
        xx[0][1] + xx[1][0]
    };
    assert!((expected - 0.02).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 100_000;
    let anti = (0..n)
        .filter(|_| {
            let (b, post) = state.measure(0, Basis::X, &mut rng).unwrap();
            let (c, _) = post.measure(1, Basis::X, &mut rng).unwrap();
            b != c
        })
        .count();
    assert!(within_3_sigma(anti, n, expected), "{anti}/{n}");
}

#[test]
fn measuring_b_of_phi_collapses_c() {
    let state = pair_state(PairKind::Phi, SchmidtParam::new(0.6).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 50_000;
    let mut zeros = 0;
    for _ in 0..n {
        let (b, post) = state.measure(0, Basis::Z, &mut rng).unwrap();
        assert_eq!(post.born_probability(1, Basis::Z, b).unwrap(), 1.0);
        zeros += (b == 0) as usize;
    }
    assert!(within_3_sigma(zeros, n, 0.36));
}
