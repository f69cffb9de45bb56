//! `altbase`: exact computations for alternate-base and composed
//! β-transformations, with JSON on stdout.
//!
//! Exit status: 0 on success, 2 on malformed input, 3 on a domain error.
//! Errors are written to stderr as `{"schema": 1, "error": {"code", "message"}}`.

mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Map descriptors have the form `comp:f1,f2,...` with `f1` applied first, so
/// `comp:4/3,3/2` is `x ↦ T_{3/2}(T_{4/3}(x))`. A bare number `b` means `comp:b`.
#[derive(Parser, Debug)]
#[command(name = "altbase", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Greedy digits of x in a periodic base sequence.
    Expand {
        /// Comma-separated bases, e.g. `7/3,3`.
        #[arg(long)]
        bases: String,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 20)]
        digits: usize,
        #[arg(long, default_value_t = 0)]
        start_level: usize,
    },
    /// Forward orbit of a point, classified.
    Orbit {
        #[arg(long)]
        map: String,
        /// A point in [0, 1), or `one` for the left limit at 1.
        #[arg(long, default_value = "one")]
        point: String,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Fundamental intervals of a given rank.
    Partition {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 2)]
        rank: usize,
    },
    /// Exact invariant density.
    Density {
        #[arg(long)]
        map: String,
        #[arg(long, value_enum, default_value_t = Method::Solve)]
        method: Method,
        #[arg(long, default_value_t = 64)]
        max_rank: usize,
        /// With `--method closed`: numerator of the rational base.
        #[arg(long)]
        p: Option<u64>,
        /// With `--method closed`: denominator of the rational base.
        #[arg(long)]
        q: Option<u64>,
        /// With `--method closed`: the integer factor is `k q`.
        #[arg(long)]
        k: Option<u64>,
        /// Also write `bin_lo,bin_hi,height` rows here.
        #[arg(long)]
        csv: Option<String>,
    },
    /// Decide whether two systems `(β, n)` share their invariant measure.
    Compare {
        /// `β,n`
        #[arg(long)]
        pair: String,
        /// `β',m`
        #[arg(long)]
        pair2: String,
    },
    /// Search a grid of rational systems for measure coincidences.
    Search {
        #[arg(long, default_value_t = 7)]
        pmax: u64,
        #[arg(long, default_value_t = 4)]
        denmax: u64,
        #[arg(long, default_value_t = 8)]
        nmax: u64,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Birkhoff histogram along a perturbed float orbit.
    Simulate {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 1_000_000)]
        iters: u64,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        burn_in: u64,
        /// Start point; random per chunk when absent.
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        csv: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Ulam approximation of the invariant density.
    Ulam {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 1000)]
        cells: usize,
        #[arg(long, default_value_t = 100_000)]
        power_iters: usize,
        #[arg(long)]
        csv: Option<String>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dk10,
    Solve,
    Closed,
    Rp,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return fail(&commands::CliError {
                code: "UsageError".into(),
                message: e.render().to_string().trim().to_string(),
                exit: 2,
            })
        }
    };
    match commands::run(&cli.command) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("json");
            // Broken pipes are ignored.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &commands::CliError) -> ExitCode {
    let body = json!({
        "schema": 1,
        "error": { "code": e.code, "message": e.message },
    });
    eprintln!("{body}");
    ExitCode::from(e.exit)
}
