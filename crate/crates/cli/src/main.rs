mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use permoment::aggregate::BruteConfig;
use permoment::{Error, Limits};
use serde_json::json;

use args::{Cli, Command, Format};
use output::{render, Numbers};

const EXIT_COMPUTATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidPermutation(_) | Error::DuplicateEntry(_) => "invalid-permutation",
        Error::CapExceeded { .. } | Error::MergeCapExceeded { .. } => "cap-exceeded",
        Error::IndexOutOfRange { .. } | Error::OutOfRange(_) => "out-of-range",
        Error::PatternSyntax { .. } | Error::InvalidPattern(_) => "invalid-pattern",
        Error::InvalidTuple(_) => "invalid-tuple",
        Error::PolySyntax { .. } | Error::UnknownVariable { .. } => "invalid-polynomial",
        Error::StatisticSpec { .. } => "invalid-statistic",
        Error::RationalSyntax(_) | Error::FormulaSyntax(_) => "syntax",
        Error::SingularSystem => "singular-system",
        Error::VerificationFailed { .. } => "verification-failed",
        Error::InsufficientData(_) => "insufficient-data",
        Error::BelowValidity { .. } => "below-validity",
        Error::Precondition(_) => "precondition",
    }
}

fn report_error(err: &anyhow::Error, format: Format) {
    let kind = err.downcast_ref::<Error>().map(error_kind).unwrap_or("error");
    let causes: Vec<String> = err.chain().skip(1).map(|c| c.to_string()).collect();
    let mut stderr = std::io::stderr().lock();
    if format == Format::Json {
        let doc = json!({ "error": { "kind": kind, "message": err.to_string(), "causes": causes } });
        let _ = writeln!(stderr, "{doc}");
    } else {
        let _ = writeln!(stderr, "error [{kind}]: {err}");
        for c in causes {
            let _ = writeln!(stderr, "  caused by: {c}");
        }
    }
}

fn run(argv: Vec<OsString>) -> u8 {
    let argv = match config::merge_config(Cli::command(), argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("{}", Cli::command().render_usage());
            return EXIT_USAGE;
        }
    };
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_USAGE;
        }
    };
    let g = &cli.global;

    let mut limits = Limits::from_env();
    if let Some(n) = g.max_n {
        limits.max_n = n;
        // Library entry points without a limits argument read the variable.
        std::env::set_var(permoment::MAX_N_ENV, n.to_string());
    }
    let threads = g.threads.unwrap_or(0);
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return EXIT_COMPUTATION;
        }
    }
    let ctx = commands::Ctx {
        numbers: Numbers { decimal: g.decimal },
        limits,
        brute: BruteConfig {
            max_n: limits.max_n,
            threads: 0,
            ..BruteConfig::default()
        },
        threads,
    };

    match commands::dispatch(&cli.command, &ctx) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = render(&out, g.format, &mut stdout).and_then(|_| Ok(stdout.flush()?)) {
                report_error(&e, g.format);
                return EXIT_COMPUTATION;
            }
            let failed_rows = matches!(cli.command, Command::ReproducePaper(_))
                && out.json["failed"].as_u64().unwrap_or(0) > 0;
            if failed_rows {
                EXIT_COMPUTATION
            } else {
                0
            }
        }
        Err(e) => {
            report_error(&e, g.format);
            EXIT_COMPUTATION
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
