//! A dishonest agent attacking the co-agent's line, modeled as a random Z/X
//! intercept. Detection frequency versus the number of useful decoys at a
//! zero threshold, next to the binomial prediction.

use qss::analysis::detection_probability_oracle;
use qss::engine::AttackPlacement;
use qss::io::run_trials;
use qss::{InterceptPolicy, SessionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("k_u  simulated  predicted");
    for k in [1, 2, 3, 5, 8, 10, 15, 20] {
        let cfg = SessionConfig {
            decoys: k,
            eta_t: 0.0,
            attacks: vec![AttackPlacement { line: 1, policy: InterceptPolicy::RandomZx }],
            ..SessionConfig::new(2, 8, 100 + k as u64)
        };
        let results = run_trials(&cfg, 5_000)?;
        let freq = results.iter().filter(|r| r.detected).count() as f64 / results.len() as f64;
        println!("{k:<4} {freq:<10.4} {:.4}", detection_probability_oracle(0.25, k, 0.0));
    }
    Ok(())
}
