//! Config-driven scans and their byte-stable outputs.

pub mod config;
pub mod job;
pub mod output;

pub use config::{parse_config, parse_config_with, Command, OutputKind, ScanJob};
pub use job::{run_job, Artifact, JobResult, RunOptions};
pub use output::{fmt_sig9, grid_csv, grid_pgm, sha256_hex, write_grid_csv, write_pgm};
