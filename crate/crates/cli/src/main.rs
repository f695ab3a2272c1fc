//! Batch driver for the quasi-local mass toolkit.
//!
//! Exit codes: 0 all checks passed, 1 invalid input, 2 numerical failure,
//! 3 a check was violated.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "quasilocal", version, about = "Quasi-local mass flows, mass monotonicity and Killing-spinor checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving the output files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed of the random samples.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Anticommutation and self-adjointness of the Clifford matrices.
    CliffordVerify,
    /// Spinor `a` with `zeta_a` equal to a given future null vector.
    NullDecompose,
    /// Null round trip, spinor norm identity and Dirac identity sweeps.
    SpinorVerify,
    /// Runs the flow and writes its trace.
    Flow,
    /// Runs the flow and checks the mass along it.
    Mass,
    /// Convergence of the position-vector identities under refinement.
    GeometryVerify,
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl From<quasilocal::Error> for Failure {
    fn from(e: quasilocal::Error) -> Self {
        use quasilocal::Error as E;
        match e {
            E::FlowBreakdown { .. } | E::Divergence { .. } | E::NormalFrame(_) => Failure::Numerical(e.to_string()),
            E::InvalidInput(m) => Failure::Invalid(m),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

/// Result of a command: files for `--out`, the summary printed on stdout and
/// whether every check held.
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub summary: String,
    pub pass: bool,
}

pub struct Context {
    pub config: Option<String>,
    pub seed: u64,
}

impl Context {
    pub fn require_config(&self) -> Result<&str, Failure> {
        self.config.as_deref().ok_or_else(|| Failure::Invalid("this command needs --config <path>".into()))
    }
}

fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Invalid(format!("cannot create {}: {e}", dir.display())))?;
    for (name, content) in files {
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let config = match &cli.config {
        Some(p) => Some(
            fs::read_to_string(p).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let ctx = Context { config, seed: cli.seed };
    let outcome = match cli.command {
        Command::CliffordVerify => commands::clifford_verify(&ctx)?,
        Command::NullDecompose => commands::null_decompose(&ctx)?,
        Command::SpinorVerify => commands::spinor_verify(&ctx)?,
        Command::Flow => commands::flow(&ctx)?,
        Command::Mass => commands::mass(&ctx)?,
        Command::GeometryVerify => commands::geometry_verify(&ctx)?,
    };
    if let Some(dir) = &cli.out {
        write_outputs(dir, &outcome.files)?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            // A closed pipe downstream is not a failure of the command.
            let _ = std::io::stdout().write_all(outcome.summary.as_bytes());
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("check violated");
                ExitCode::from(3)
            }
        }
        Err(f) => {
            match &f {
                Failure::Invalid(m) => eprintln!("invalid input: {m}"),
                Failure::Numerical(m) => eprintln!("numerical failure: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
