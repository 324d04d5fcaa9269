//! Depolarizing noise and photon loss without an attacker: the check-group
//! error rate follows 2q/3, and the threshold decides whether honest noise
//! aborts the session.

use qss::analysis::{aggregate, expected_qber_oracle};
use qss::io::run_trials;
use qss::{AttackModel, NoiseModel, SessionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("q      QBER_Z  QBER_X  2q/3    detected@0.05");
    for q in [0.0, 0.03, 0.06, 0.09, 0.12] {
        let noise = NoiseModel::new(q, 0.0)?;
        let cfg = SessionConfig { decoys: 4_000, noise, ..SessionConfig::new(2, 50, 9) };
        let s = aggregate(&run_trials(&cfg, 200)?)?;
        let oracle = expected_qber_oracle(AttackModel::None, noise)?;
        println!(
            "{q:<6.2} {:<7.4} {:<7.4} {:<7.4} {:.3}",
            s.qber_z[0].unwrap_or(0.0),
            s.qber_x[0].unwrap_or(0.0),
            oracle.z,
            s.detection_frequency
        );
    }

    println!("\nloss   sifted fraction  lost decoys per line");
    for l in [0.0, 0.1, 0.3] {
        let cfg = SessionConfig { decoys: 100, noise: NoiseModel::new(0.0, l)?, ..SessionConfig::new(3, 2_000, 10) };
        let results = run_trials(&cfg, 20)?;
        let lost: f64 = results.iter().map(|r| r.check.lines[0].lost_decoys as f64).sum::<f64>() / results.len() as f64;
        let sifted: f64 = results.iter().map(|r| r.sifted_fraction()).sum::<f64>() / results.len() as f64;
        println!("{l:<6.1} {sifted:<16.4} {lost:.1}");
    }
    Ok(())
}
