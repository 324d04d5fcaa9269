//! An outside eavesdropper on one line: measured check-group error rates
//! against the analytic prediction for each interception policy.

use qss::analysis::{aggregate, expected_qber_oracle};
use qss::engine::AttackPlacement;
use qss::io::run_trials;
use qss::{AttackModel, InterceptPolicy, NoiseModel, SessionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("policy     Z-group QBER  X-group QBER  predicted    detection");
    for policy in [InterceptPolicy::FixedZ, InterceptPolicy::FixedX, InterceptPolicy::RandomZx] {
        let cfg = SessionConfig {
            decoys: 200,
            attacks: vec![AttackPlacement { line: 0, policy }],
            ..SessionConfig::new(2, 500, 3)
        };
        let summary = aggregate(&run_trials(&cfg, 50)?)?;
        let oracle = expected_qber_oracle(AttackModel::InterceptResend(policy), NoiseModel::None)?;
        println!(
            "{:<10} {:<13.4} {:<13.4} ({:.2}, {:.2})  {:.2}",
            policy.name(),
            summary.qber_z[0].unwrap_or(0.0),
            summary.qber_x[0].unwrap_or(0.0),
            oracle.z,
            oracle.x,
            summary.detection_frequency
        );
    }
    Ok(())
}
