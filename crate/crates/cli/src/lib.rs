//! Batch front-end: `pillar <command> --config run.json --out dir`.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::json;

pub use commands::{Command, CommandError};
use config::{load_config, ConfigError, RunConfig};
use output::{write_error, write_outputs, ManifestHeader};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pillar", version, about = "Scattering and guided modes of z-periodic pillars")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Exit with code 4 when a certificate is inconclusive.
    #[arg(long)]
    pub require_certificate: bool,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    let cfg = match load_config(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            let kind = match e {
                ConfigError::Io(_) => "config-io",
                ConfigError::Parse(_) => "config-parse",
                ConfigError::Invalid(_) => "validation",
            };
            return fail(&cli.out, cli.command, EXIT_VALIDATION, kind, &e.messages());
        }
    };
    let pool = match cli.threads {
        Some(0) => return fail(&cli.out, cli.command, EXIT_VALIDATION, "validation", &["--threads must be >= 1".into()]),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => return fail(&cli.out, cli.command, EXIT_IO, "io", &[e.to_string()]),
    };
    pool.install(|| execute(cli, &cfg))
}

fn execute(cli: &Cli, cfg: &RunConfig) -> i32 {
    let mut disc = commands::Discretization::default();
    let out = match commands::run_command(cli.command, cfg, &mut disc) {
        Ok(out) => out,
        Err(e) => return fail(&cli.out, cli.command, e.exit_code(), e.kind(), &e.messages()),
    };
    let (status, code) = if out.inconclusive && cli.require_certificate {
        ("inconclusive", EXIT_INCONCLUSIVE)
    } else {
        ("ok", EXIT_OK)
    };
    let n = &cfg.raw.numerics;
    let header = ManifestHeader {
        command: cli.command.as_str(),
        input_sha256: &cfg.input_sha256,
        status,
        exit_code: code,
        tolerances: commands::tolerances(cfg),
        discretization: json!({
            "n_radial": n.n_radial,
            "grading": n.grading.as_str(),
            "m_max": disc.m_max,
            "l_max": disc.l_max,
        }),
    };
    if let Err(e) = write_outputs(&cli.out, &header, &out) {
        eprintln!("pillar: cannot write outputs: {e}");
        return EXIT_IO;
    }
    if code == EXIT_INCONCLUSIVE {
        eprintln!("pillar: certificate inconclusive");
    }
    code
}

fn fail(dir: &Path, cmd: Command, code: i32, kind: &str, messages: &[String]) -> i32 {
    for m in messages {
        eprintln!("pillar: {m}");
    }
    if let Err(e) = write_error(dir, cmd.as_str(), code, kind, messages) {
        eprintln!("pillar: cannot write error record: {e}");
    }
    code
}
