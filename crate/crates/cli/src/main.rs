mod config;
mod report;
mod suites;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{Flags, Format, RunConfig, Suite};

/// Seeded verification suites for quantum commitment schemes and the oracle game.
#[derive(Parser)]
#[command(name = "qcommit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity and trace-distance orderings on random state pairs
    NormsSuite(Flags),
    /// Commitment from state distinguishability instances
    QsdScheme(Flags),
    /// Swap-test commitment from channel distinguishability instances
    QcdScheme(Flags),
    /// Parallel repetition of the swap-test commitment
    Repetition(Flags),
    /// Perfectly hiding commitment from witnessable channel pairs
    PiScheme(Flags),
    /// Orthogonalization of nearly orthogonal purifications
    Orthogonalize(Flags),
    /// Oracle distinguishing protocol with honest and searched provers
    OracleProtocol(Flags),
    /// Expected oracle-difference norm against its envelope
    OracleScaling(Flags),
}

impl Command {
    fn split(self) -> (Suite, Flags) {
        match self {
            Command::NormsSuite(f) => (Suite::NormsSuite, f),
            Command::QsdScheme(f) => (Suite::QsdScheme, f),
            Command::QcdScheme(f) => (Suite::QcdScheme, f),
            Command::Repetition(f) => (Suite::Repetition, f),
            Command::PiScheme(f) => (Suite::PiScheme, f),
            Command::Orthogonalize(f) => (Suite::Orthogonalize, f),
            Command::OracleProtocol(f) => (Suite::OracleProtocol, f),
            Command::OracleScaling(f) => (Suite::OracleScaling, f),
        }
    }
}

const USAGE: u8 = 2;

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(USAGE)
}

fn main() -> ExitCode {
    let (suite, flags) = Cli::parse().command.split();
    let flags = match &flags.config {
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return usage(format!("cannot read {}: {e}", path.display())),
            };
            match serde_json::from_str::<Flags>(&text) {
                Ok(file) => flags.over(file),
                Err(e) => return usage(format!("bad config {}: {e}", path.display())),
            }
        }
        None => flags,
    };
    let cfg = match RunConfig::resolve(suite, flags) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let mut sink: Box<dyn Write> = match &cfg.out {
        Some(path) => match fs::File::create(path) {
            Ok(f) => Box::new(f),
            Err(e) => return usage(format!("cannot write {}: {e}", path.display())),
        },
        None => Box::new(std::io::stdout()),
    };

    let start = Instant::now();
    let report = match suites::run(cfg.clone()) {
        Ok(r) => r,
        Err(e @ qcommit::Error::InvalidParameter(_)) => return usage(e),
        Err(e) => {
            eprintln!("error: {suite} failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let text = match cfg.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    if let Err(e) = sink.write_all(text.as_bytes()).and_then(|_| sink.flush()) {
        return usage(format!("cannot write report: {e}"));
    }
    let passed = report.assertions.iter().filter(|a| a.pass).count();
    eprintln!("{suite}: {passed}/{} assertions passed in {:.2?}", report.assertions.len(), start.elapsed());
    for a in report.assertions.iter().filter(|a| !a.pass) {
        eprintln!("  failed {}: value {} bound {}", a.name, a.value, a.bound);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
