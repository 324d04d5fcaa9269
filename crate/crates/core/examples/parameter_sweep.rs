//! Drives the sweep runner from code and prints the CSV it writes.

use qss::io::{cmd_sweep, parse_config_str};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = parse_config_str(
        r#"
        agents = 2
        signals = 5000
        memory_mode = "no_memory"
        trials = 10
        seed = 21
        "#,
    )?;
    let mut out = Vec::new();
    cmd_sweep(&cfg, "p", &[0.05, 0.1, 0.2, 0.3], &mut out)?;
    print!("{}", String::from_utf8(out)?);
    Ok(())
}
