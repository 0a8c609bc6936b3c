use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use twogroup_cli::report::write_report;
use twogroup_cli::run::{EXIT_CONFIG, EXIT_OK};
use twogroup_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG as u8) } else { ExitCode::from(EXIT_OK as u8) };
        }
    };
    let outcome = match run(cli.command, &cli.opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if cli.opts.format != twogroup_cli::Format::Text {
        for n in &outcome.report.notes {
            eprintln!("note: {n}");
        }
    }
    let written = match &cli.opts.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_report(&outcome.report, cli.opts.format, &mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_report(&outcome.report, cli.opts.format, &mut lock).and_then(|_| lock.flush())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    ExitCode::from(outcome.status as u8)
}
