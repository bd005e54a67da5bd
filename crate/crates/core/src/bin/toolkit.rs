use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sctrap::cli::{configure_threads, exit_code_for, failure_manifest, parse_config, run_in, Command, MANIFEST_FILE};

/// Superconducting surface-trap design toolkit.
///
/// Runs one command from a TOML config; prints the manifest path on stdout.
/// Exit codes: 0 success, 1 domain failure, 2 usage/config error.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// field-solve | trap-analyze | resonator-fit | gate-power | gate-sim
    command: String,
    /// Run config (TOML with unit-suffixed keys)
    config: PathBuf,
    /// Output directory (overrides io.output_dir in the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for stochastic steps (overrides the config's seed)
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let fail = |e: sctrap::Error| {
        eprintln!("toolkit: {e}");
        let (_, path) = failure_manifest(Some(&args.command), &e, args.out.as_deref());
        if let Some(p) = path {
            println!("{}", p.display());
        }
        ExitCode::from(exit_code_for(&e) as u8)
    };
    if let Err(e) = configure_threads() {
        return fail(e);
    }
    let command: Command = match args.command.parse() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let mut config = match parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if config.command != command {
        return fail(sctrap::Error::Usage(format!(
            "command `{command}` does not match the config's command `{}`",
            config.command
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out = args.out.clone().unwrap_or_else(|| config.output_dir());
    let manifest = run_in(&config, &out);
    for w in &manifest.warnings {
        eprintln!("toolkit: warning: {w}");
    }
    if let Some(e) = &manifest.error {
        eprintln!("toolkit: {e}");
    }
    println!("{}", out.join(MANIFEST_FILE).display());
    ExitCode::from(manifest.exit_code as u8)
}
