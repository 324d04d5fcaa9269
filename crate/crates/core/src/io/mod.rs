//! Configuration files, deterministic trial runs, sweeps and result records.

mod commands;
mod config;
mod record;

pub use commands::{
    cmd_oracle, cmd_report, cmd_run, cmd_sweep, derive_seed, run_trials, sweep_configs, CommandError, OracleQuery,
    SweepParam, SweepRow,
};
pub use config::{parse_config, parse_config_str, ConfigError, ConfigFile, OutputFormat};
pub use record::{LineRecord, MetaRecord, ResultRecord, TrialRecord, TrialRow, SCHEMA_VERSION};
