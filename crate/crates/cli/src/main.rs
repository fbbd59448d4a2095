//! `due`: runs the constructions and certificates of `due-core` and writes
//! JSON or CSV reports.
//!
//! Exit codes: 0 pass, 1 usage or precondition error, 2 tolerance failure,
//! 3 solver failure.

mod commands;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { code: 1, message: msg.into() }
    }

    pub fn io(e: impl fmt::Display) -> Self {
        CliError { code: 1, message: format!("i/o: {e}") }
    }
}

impl From<due_core::Error> for CliError {
    fn from(e: due_core::Error) -> Self {
        use due_core::Error::*;
        let code = match e {
            NotCoboundary { .. } => 2,
            SolverFailure(_) => 3,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

/// `AxB` grid sizes such as `8x4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec(pub usize, pub usize);

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected AxB, got {s:?}"))?;
        let a: usize = a.trim().parse().map_err(|e| format!("{e}"))?;
        let b: usize = b.trim().parse().map_err(|e| format!("{e}"))?;
        if a == 0 || b == 0 {
            return Err("grid sizes must be positive".into());
        }
        Ok(GridSpec(a, b))
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory for reports; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Structure {
    Heisenberg,
    Abelian2,
    Abelian3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quotient {
    None,
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapKind {
    Constructed,
    Parabolic,
}

#[derive(Parser)]
#[command(name = "due", version, about = "Constructions and exact-cancellation certificates for skew-products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponential sums of the step profile eta over m in (-q0, q0) \ {0}.
    VerifyEta {
        #[arg(long, default_value_t = 3)]
        q0: u64,
        /// Number of uniform t values.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Flat margin of the bump profile; 0 gives a profile without flat margins.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Level identities, full-level sums and the coboundary over the V_n family.
    NilConstruct {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        q0: u64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        p: i64,
        /// `NTxNX`: t values times values per fiber coordinate.
        #[arg(long, default_value = "8x4")]
        grid: GridSpec,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Structure::Heisenberg)]
        structure: Structure,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solves for an E-equidistributed loop in SU(2) and verifies it.
    BuildLoop {
        /// Comma-separated spins, e.g. `1/2` or `1,3/2`.
        #[arg(long, default_value = "1/2")]
        spins: String,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of t values in the verification grid.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 10)]
        translates: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Quotient::None)]
        quotient: Quotient,
        /// Only accept zeros with a surjective differential.
        #[arg(long)]
        require_surjective: bool,
        /// Rows in the exported loop CSV.
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Full cancellation over qbar iterates for the compact V_n family.
    CompactCertificate {
        #[arg(long, default_value = "1")]
        spins: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        q0: u64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        p: i64,
        /// Loop manifest written by `build-loop`; a loop is built when omitted.
        #[arg(long = "loop")]
        loop_path: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        m: usize,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        /// Use gamma = 1 (negative control).
        #[arg(long)]
        trivial_loop: bool,
        /// `NTxNG`: t values times Haar-random group points.
        #[arg(long, default_value = "8x16")]
        grid: GridSpec,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Least-squares residual of u o f - u = phi across basis truncations.
    DueDiagnostic {
        #[arg(long = "map", value_enum, default_value_t = MapKind::Constructed)]
        map: MapKind,
        /// `zero`, a V_n index (constructed) or `exp-y` (parabolic).
        #[arg(long, default_value = "default")]
        phi: String,
        /// Comma-separated truncations: K for V_K (constructed), modes per variable (parabolic).
        #[arg(long, value_delimiter = ',')]
        truncations: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.618_033_988_749_894_9)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        q0: u64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        p: i64,
        #[arg(long, default_value = "8x4")]
        grid: GridSpec,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (outcome, output) = match cli.command {
        Command::VerifyEta { q0, grid, tol, delta, output } => (commands::verify_eta(q0, grid, tol, delta)?, output),
        Command::NilConstruct { n, q0, p, grid, tol, structure, output } => {
            (commands::nil_construct(n, q0, p, grid, tol, structure)?, output)
        }
        Command::BuildLoop { spins, m, seed, grid, translates, tol, quotient, require_surjective, samples, output } => {
            let args = commands::BuildLoopArgs {
                spins,
                m,
                seed,
                grid,
                translates,
                tol,
                quotient,
                require_surjective,
                samples,
            };
            (commands::build_loop(&args)?, output)
        }
        Command::CompactCertificate { spins, n, q0, p, loop_path, m, seed, trivial_loop, grid, tol, output } => {
            let args = commands::CompactArgs { spins, n, q0, p, loop_path, m, seed, trivial_loop, grid, tol };
            (commands::compact(&args)?, output)
        }
        Command::DueDiagnostic { map, phi, truncations, alpha, n, q0, p, grid, output } => {
            (commands::due_diagnostic(map, &phi, truncations, alpha, n, q0, p, grid)?, output)
        }
    };
    output::emit(&outcome, output.out.as_deref(), output.format)?;
    eprintln!(
        "{}: {} {}",
        outcome.command,
        if outcome.passed { "pass" } else { "FAIL" },
        outcome.summary
    );
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
