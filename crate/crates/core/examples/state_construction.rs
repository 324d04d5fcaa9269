//! Builds the four signal states and their M-party forms, and shows the
//! X-basis correlation of `φ` for a few Schmidt parameters.

use qss::qubit::Basis;
use qss::states::{multiparty_state, pair_from_ops, pair_state, PairKind, SchmidtParam};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = SchmidtParam::new(0.6)?;
    for kind in PairKind::ALL {
        let written = pair_state(kind, s);
        let generated = pair_from_ops(kind, s);
        let amps: Vec<String> = written.amplitudes().iter().map(|a| format!("{:+.3}", a.re)).collect();
        println!(
            "{kind:<4} code bit {}  amplitudes [{}]  overlap with local-op form {:.12}",
            kind.code_bit(),
            amps.join(" "),
            written.overlap(&generated)
        );
    }

    let ghz_like = multiparty_state(PairKind::PsiPrime, s, 4)?;
    let support: Vec<String> = ghz_like
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(i, a)| format!("{:+.1}|{i:04b}>", a.re))
        .collect();
    println!("psi' for 4 agents: {}", support.join(" "));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 20_000;
    println!("\nalpha  sampled P(X outcomes differ)  (alpha - beta)^2 / 2");
    for alpha in [0.3, 0.6, std::f64::consts::FRAC_1_SQRT_2, 0.8] {
        let s = SchmidtParam::new(alpha)?;
        let phi = pair_state(PairKind::Phi, s);
        let mut differ = 0;
        for _ in 0..n {
            let (b, post) = phi.measure(0, Basis::X, &mut rng)?;
            differ += (post.measure(1, Basis::X, &mut rng)?.0 != b) as usize;
        }
        let law = (s.alpha() - s.beta()).powi(2) / 2.0;
        println!("{alpha:.3}  {:.4}                        {law:.4}", differ as f64 / n as f64);
    }
    Ok(())
}
