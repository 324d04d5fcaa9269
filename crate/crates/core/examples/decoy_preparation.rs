//! Prepares each decoy state from a non-maximally entangled `φ` by measuring
//! one half in Z and correcting the other.

use qss::qubit::Basis;
use qss::states::{correction_program, pair_state, prepare_decoy, DecoyKind, PairKind, SchmidtParam};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = SchmidtParam::new(0.6)?;
    println!("target  bit 0 program   bit 1 program");
    for target in DecoyKind::ALL {
        let show = |bit| format!("{:?}", correction_program(target, bit).gates().iter().map(gate_name).collect::<Vec<_>>());
        println!("{target:<7?} {:<15} {}", show(0), show(1));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let phi = pair_state(PairKind::Phi, s);
    let zeros = (0..10_000).filter(|_| phi.measure(0, Basis::Z, &mut rng).map(|(b, _)| b == 0).unwrap_or(false)).count();
    println!("\nbranch 0 taken {zeros} / 10000 times (alpha^2 = {:.2})", s.alpha().powi(2));

    for target in DecoyKind::ALL {
        let worst = (0..1_000)
            .map(|_| prepare_decoy(target, s, &mut rng).map(|d| d.overlap(&target.state())))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(1.0, f64::min);
        println!("{target:?}: worst overlap over 1000 preparations {worst:.12}");
    }
    Ok(())
}

fn gate_name(g: &qss::qubit::Gate) -> &'static str {
    if *g == qss::qubit::Gate::FLIP {
        "U1"
    } else if *g == qss::qubit::Gate::HADAMARD {
        "H"
    } else {
        "?"
    }
}
