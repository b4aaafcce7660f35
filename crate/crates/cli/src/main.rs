//! `photocount`: photon-counting statistics of lossy linear multiports from
//! scenario files.
//!
//! Exit codes: 0 success, 1 I/O, parse or usage error, 2 invalid scenario or
//! out-of-domain request, 3 size guard exceeded, 4 numerical failure,
//! 5 engine/oracle mismatch.

mod commands;
mod error;
mod format;
mod scenario;

use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Algo, Format, ScanParam};
use error::{exit, CliResult};

#[derive(Parser)]
#[command(name = "photocount", version, about = "Photon-counting statistics of lossy linear optical networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every invariant of a scenario file.
    Validate { path: PathBuf },
    /// Count probabilities of every pattern up to a total photon number.
    Simulate {
        path: PathBuf,
        /// Largest total count to tabulate (default: the scenario cutoff).
        #[arg(long)]
        max_total: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Sweep the common overlap or a uniform efficiency and report P(1,1), P(2,0), P(0,2).
    HomScan {
        path: PathBuf,
        #[arg(long, value_enum)]
        param: ScanParam,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Compare the engine with the brute-force Fock-space simulator.
    OracleCompare {
        path: PathBuf,
        /// Internal-mode dimension used by the simulator.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        max_total: Option<usize>,
        #[arg(long, hide = true, allow_negative_numbers = true)]
        inject_error: Option<f64>,
    },
    /// Median-of-5 timings of the permanent kernels on random complex matrices.
    BenchPermanent {
        /// Matrix sizes, e.g. `2..8,16`.
        #[arg(long)]
        sizes: String,
        #[arg(long, value_enum, default_value_t = Algo::Both)]
        algo: Algo,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte-Carlo zero-count probability for the scenario's multimode section.
    MultimodeP0 { path: PathBuf },
}

fn run(command: Command, out: &mut impl Write) -> CliResult<()> {
    match command {
        Command::Validate { path } => commands::validate(&path, out),
        Command::Simulate { path, max_total, format } => commands::simulate(&path, max_total, format, out),
        Command::HomScan { path, param, from, to, steps } => commands::hom_scan(&path, param, from, to, steps, out),
        Command::OracleCompare { path, d, max_total, inject_error } => {
            commands::oracle_compare(&path, d, max_total, inject_error, out)
        }
        Command::BenchPermanent { sizes, algo, seed } => {
            commands::bench_permanent(&commands::parse_sizes(&sizes)?, algo, seed, out)
        }
        Command::MultimodeP0 { path } => commands::multimode_p0(&path, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::IO_OR_PARSE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli.command, &mut out);
    let flushed = out.flush();
    match result.and(flushed.map_err(Into::into)) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
