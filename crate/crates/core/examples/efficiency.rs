//! Qubit efficiency and classical cost with and without quantum memory.

use qss::analysis::{classical_cost, intrinsic_efficiency, useful_rate};
use qss::{run_session, MemoryMode, SessionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("mode            M  p     eta_q   sifted  (1-p)^M  classical bits");
    for mode in [MemoryMode::QuantumMemory, MemoryMode::NoMemory] {
        for m in [2, 3] {
            for p in [0.05, 0.2] {
                let cfg = SessionConfig { p, decoys: 50, memory_mode: mode, ..SessionConfig::new(m, 10_000, 1) };
                let r = run_session(&cfg)?;
                println!(
                    "{:<15} {m}  {p:<5} {:<7.4} {:<7.4} {:<8.4} {}",
                    format!("{mode:?}"),
                    intrinsic_efficiency(&r),
                    r.sifted_fraction(),
                    useful_rate(p, m)?,
                    classical_cost(&cfg)
                );
            }
        }
    }
    Ok(())
}
