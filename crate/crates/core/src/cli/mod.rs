//! Batch front end: declarative run configs in, CSV/JSON results out.
//!
//! A run is described by one TOML file whose keys carry their units
//! (`w_um`, `Omega_rf_MHz`, `V_rf_V`, ...). [`parse_config`] validates it
//! against the command's schema and converts everything to SI; [`run`]
//! executes the matching pipeline, writes its outputs and a
//! `manifest.json` listing every file with its SHA-256.
//!
//! Outputs are deterministic: the same config and seed give byte-identical
//! files. Wall-clock timings are the one exception and therefore live in a
//! separate `timings.json` that the manifest names but does not checksum.
//!
//! ```no_run
//! use std::path::Path;
//! let cfg = sctrap::cli::parse_config(Path::new("configs/gate_power.toml"))?;
//! let manifest = sctrap::cli::run(&cfg);
//! assert_eq!(manifest.exit_code, 0);
//! # Ok::<(), sctrap::Error>(())
//! ```

mod config;
mod pipelines;
mod plotdata;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{parse_config, parse_config_str, Command, RunConfig, Value};
pub use plotdata::{describe_line, emit_plotdata, Axis, PlotKind, PlotResults, Table};

use crate::error::{Error, Result};
use pipelines::RunContext;

/// Name of the environment variable selecting the sweep thread count.
pub const THREADS_ENV: &str = "TOOLKIT_THREADS";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub command: String,
    /// SHA-256 of the canonical (SI) form of the config.
    pub config_sha256: String,
    pub seed: u64,
    /// `ok`, `domain-error` or `usage-error`.
    pub status: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub warnings: Vec<String>,
    /// The config as parsed, in SI units.
    pub config: serde_json::Value,
    pub results: serde_json::Value,
    /// Operations whose wall-clock time is recorded in `timings_file`.
    pub timed_operations: Vec<String>,
    pub timings_file: String,
    pub outputs: Vec<OutputFile>,
}

#[derive(Debug, Serialize)]
struct Timing {
    operation: String,
    seconds: f64,
}

/// Exit code for an error: 2 for usage/config problems, 1 for domain
/// failures.
pub fn exit_code_for(e: &Error) -> i32 {
    if e.is_usage() {
        2
    } else {
        1
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Sizes the global rayon pool from [`THREADS_ENV`] if set. Call once,
/// before any parallel work.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    // A pool that already exists (e.g. in tests) keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs a config into its own output directory (`[io] output_dir`).
pub fn run(config: &RunConfig) -> RunManifest {
    run_in(config, &config.output_dir())
}

/// Runs a config, writing every output and the manifest into `out_dir`.
/// Failures are reported in the returned manifest (and in the manifest
/// file, if the directory is writable), never as a panic.
pub fn run_in(config: &RunConfig, out_dir: &Path) -> RunManifest {
    let mut ctx = RunContext::new(out_dir.to_path_buf());
    let outcome = std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e)).and_then(|_| {
        match config.command {
            Command::FieldSolve => pipelines::field_solve(config, &mut ctx),
            Command::TrapAnalyze => pipelines::trap_analyze(config, &mut ctx),
            Command::ResonatorFit => pipelines::resonator_fit(config, &mut ctx),
            Command::GatePower => pipelines::gate_power(config, &mut ctx),
            Command::GateSim => pipelines::gate_sim(config, &mut ctx),
        }
    });
    let (status, exit_code, error) = match &outcome {
        Ok(()) => ("ok", 0, None),
        Err(e) => (if e.is_usage() { "usage-error" } else { "domain-error" }, exit_code_for(e), Some(e.to_string())),
    };
    let timings: Vec<Timing> =
        ctx.timings.iter().map(|(op, s)| Timing { operation: op.clone(), seconds: *s }).collect();
    let mut manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        command: config.command.to_string(),
        config_sha256: sha256_hex(config.to_toml_string().as_bytes()),
        seed: config.seed,
        status: status.to_string(),
        exit_code,
        error,
        warnings: ctx.warnings.clone(),
        config: config.to_json(),
        results: serde_json::Value::Object(ctx.results.clone()),
        timed_operations: timings.iter().map(|t| t.operation.clone()).collect(),
        timings_file: TIMINGS_FILE.to_string(),
        outputs: Vec::new(),
    };
    for path in &ctx.outputs {
        match std::fs::read(path) {
            Ok(bytes) => manifest.outputs.push(OutputFile {
                path: path.strip_prefix(out_dir).unwrap_or(path).to_string_lossy().replace('\\', "/"),
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            }),
            Err(e) => manifest.warnings.push(format!("could not checksum {}: {e}", path.display())),
        }
    }
    if out_dir.is_dir() {
        let write = |name: &str, text: String| {
            let p = out_dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        let r = serde_json::to_string_pretty(&timings)
            .map_err(Error::from)
            .and_then(|t| write(TIMINGS_FILE, t + "\n"))
            .and_then(|_| Ok(serde_json::to_string_pretty(&manifest)?))
            .and_then(|m| write(MANIFEST_FILE, m + "\n"));
        if let Err(e) = r {
            manifest.warnings.push(format!("manifest not written: {e}"));
        }
    }
    manifest
}

/// Manifest for a run that never started (config rejected). Written to
/// `out_dir` when one is known so that every failure leaves a record.
pub fn failure_manifest(command: Option<&str>, error: &Error, out_dir: Option<&Path>) -> (RunManifest, Option<PathBuf>) {
    let manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.unwrap_or("").to_string(),
        config_sha256: String::new(),
        seed: 0,
        status: if error.is_usage() { "usage-error" } else { "domain-error" }.to_string(),
        exit_code: exit_code_for(error),
        error: Some(error.to_string()),
        warnings: Vec::new(),
        config: serde_json::Value::Null,
        results: serde_json::Value::Null,
        timed_operations: Vec::new(),
        timings_file: TIMINGS_FILE.to_string(),
        outputs: Vec::new(),
    };
    let path = out_dir.and_then(|d| {
        std::fs::create_dir_all(d).ok()?;
        let p = d.join(MANIFEST_FILE);
        std::fs::write(&p, serde_json::to_string_pretty(&manifest).ok()? + "\n").ok()?;
        Some(p)
    });
    (manifest, path)
}
