use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kfid_core::catalog;
use kfid_core::scan::{parse_config_with, run_job, Command, RunOptions};

#[derive(Parser)]
#[command(
    name = "kfid",
    version,
    about = "Momentum-space fidelity scans over lattice models"
)]
struct Cli {
    /// Print every model with its parameter schema and exit.
    #[arg(long)]
    list_models: bool,

    #[command(subcommand)]
    command: Option<Job>,
}

#[derive(clap::Args)]
struct JobArgs {
    /// Job config file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Override a config key, e.g. `--set q2.mu=0`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Directory prefix for relative output paths.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,

    /// Print the effective config and exit without running.
    #[arg(long)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Job {
    FidelityMap(JobArgs),
    GapMap(JobArgs),
    Chern(JobArgs),
    Z2(JobArgs),
    Segment(JobArgs),
    CriticalLine(JobArgs),
    Counterexamples(JobArgs),
    Ising(JobArgs),
}

impl Job {
    fn split(self) -> (Command, JobArgs) {
        match self {
            Job::FidelityMap(a) => (Command::FidelityMap, a),
            Job::GapMap(a) => (Command::GapMap, a),
            Job::Chern(a) => (Command::Chern, a),
            Job::Z2(a) => (Command::Z2, a),
            Job::Segment(a) => (Command::Segment, a),
            Job::CriticalLine(a) => (Command::CriticalLine, a),
            Job::Counterexamples(a) => (Command::Counterexamples, a),
            Job::Ising(a) => (Command::Ising, a),
        }
    }
}

// stdout may be a closed pipe (`kfid ... | head`); that is not an error
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn list_models() {
    let mut out = String::new();
    for m in catalog() {
        out.push_str(&format!(
            "{:<22} dim_k={} [{}]  {}\n",
            m.name(),
            m.dim_k,
            m.schema.join(", "),
            m.summary
        ));
    }
    emit(&out);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if cli.list_models {
        list_models();
        return ExitCode::SUCCESS;
    }
    let Some(job) = cli.command else {
        eprintln!("error: a subcommand is required (try --help)");
        return ExitCode::from(2);
    };
    let (command, args) = job.split();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let job = match parse_config_with(&text, &args.overrides, Some(command)) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    if args.print_config {
        emit(&job.to_string());
        return ExitCode::SUCCESS;
    }
    let opts = RunOptions {
        workers: args.workers,
        out_dir: args.out,
    };
    match run_job(&job, &opts) {
        Ok(r) => {
            let mut out = r.report;
            for a in &r.artifacts {
                out.push_str(&format!(
                    "wrote {} {} sha256={}\n",
                    a.kind.name(),
                    a.path.display(),
                    a.sha256
                ));
            }
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
