//! Runs a batch config in-process, the same way the `toolkit` binary does.
//!
//! ```text
//! cargo run --example run_config -- configs/gate_power.toml
//! ```
//!
//! Without an argument an inline gate-power config is used.

use std::path::Path;

use sctrap::cli::{parse_config, parse_config_str, run_in};

const INLINE: &str = r#"
command = "gate-power"

[physics]
mu_parallel_J_per_T = -9.28e-24
dBdr_T_per_m = 1.2e-6
B_H0_T = 5.9e-11
b_j = 0.7071067811865476
q0_nm = 9.30
phi_deg = 45
g_m_MHz = 30
omega_rock_MHz = 4.4
omega_r_GHz = 1.074
Omega_M_kHz = 1
Omega_S_kHz = 2
Omega_C_kHz = 30

[grid]
scheme = "SS"
Q_int_points = 20
Q_ext_points = 20
"#;

fn main() -> sctrap::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => parse_config(Path::new(&path))?,
        None => parse_config_str(INLINE, Path::new("inline.toml"), Path::new("."))?,
    };
    // Every key now carries an SI suffix; this form is what gets hashed.
    println!("{}", cfg.to_toml_string());

    let out = std::env::temp_dir().join(format!("sctrap_{}", cfg.command));
    let manifest = run_in(&cfg, &out);
    println!("status {} (exit code {})", manifest.status, manifest.exit_code);
    for f in &manifest.outputs {
        println!("  {}  {}", &f.sha256[..12], f.path);
    }
    println!("{}", serde_json::to_string_pretty(&manifest.results)?);
    Ok(())
}
