//! One honest session end to end: the boss's key, each agent's raw bits and
//! the jointly reconstructed key.

use qss::{run_session, MemoryMode, SessionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for mode in [MemoryMode::QuantumMemory, MemoryMode::NoMemory] {
        let cfg = SessionConfig { memory_mode: mode, ..SessionConfig::new(2, 1000, 42) };
        let r = run_session(&cfg)?;
        println!("{mode:?}: detected={} sifted={}/{} q_u={} q_t={} classical bits={}", r.detected, r.sifted_rounds, cfg.signals, r.q_u, r.q_t, r.classical_bits);
        for (i, line) in r.check.lines.iter().enumerate() {
            println!(
                "  line {i}: Z group {}/{} errors, X group {}/{} errors",
                line.z_group.errors, line.z_group.tested, line.x_group.errors, line.x_group.tested
            );
        }
        if let Some(key) = &r.key {
            let bits = |v: &[u8]| v.iter().take(24).map(|b| char::from(b'0' + b)).collect::<String>();
            println!("  boss     {}", bits(&key.boss));
            for (i, a) in key.agents.iter().enumerate() {
                println!("  agent {i}  {}", bits(a));
            }
            println!("  joint    {}  agreement {:?}", bits(&key.reconstructed), key.agreement);
        }
    }
    Ok(())
}
