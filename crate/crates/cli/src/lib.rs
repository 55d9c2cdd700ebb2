//! Command line front-end for `gibbsdiv`.

pub mod commands;
pub mod config;
pub mod density;
pub mod error;
pub mod output;
pub mod verify;

use config::{Cli, Command};
use error::CliError;
use output::OutputDir;

/// Runs one subcommand and writes its manifest. The summary is printed as
/// JSON on standard output.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    if let Some(jobs) = common.jobs {
        // Ignored when a pool already exists, as in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    let mut out = OutputDir::create(&common.out)?;
    let result = match &cli.command {
        Command::Pdf(a) => commands::pdf(a, &mut out),
        Command::Weights(a) => commands::weights(a, &mut out),
        Command::Simulate(a) => commands::simulate(a, &mut out),
        Command::Moments(a) => commands::moments(a, &mut out),
        Command::Verify(a) => verify::command(a, &mut out),
    };
    // The manifest is written even when checks fail, so the run can be audited.
    let manifest = out.manifest(&cli.command);
    let summary = result?;
    manifest?;
    println!(
        "{}",
        serde_json::json!({
            "command": cli.command.name(),
            "out": out.root(),
            "summary": summary,
        })
    );
    Ok(())
}
