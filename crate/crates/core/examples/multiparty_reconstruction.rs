//! Key reconstruction with more than two agents. The full parity of all
//! outcomes only matches the boss's bit for even M; the first-last rule works
//! for every M.

use qss::analysis::aggregate;
use qss::io::run_trials;
use qss::{ReconstructionRule, SessionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("M  full_parity  first_last_xor");
    for m in 2..=6 {
        let agreement = |rule| -> Result<f64, Box<dyn std::error::Error>> {
            let cfg = SessionConfig { reconstruction: rule, ..SessionConfig::new(m, 2_000, m as u64) };
            Ok(aggregate(&run_trials(&cfg, 10)?)?.mean_agreement.unwrap_or(f64::NAN))
        };
        println!("{m}  {:<12.4} {:.4}", agreement(ReconstructionRule::FullParity)?, agreement(ReconstructionRule::FirstLastXor)?);
    }
    Ok(())
}
