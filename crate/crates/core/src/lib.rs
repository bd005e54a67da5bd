//! Design and power-budget toolkit for superconducting surface-trap chips.
//!
//! - [`fieldsolver`]: 2D cross-section solves, London-screened
//!   magnetoquasistatics and electrostatics, with corner-field, gradient
//!   and Ampère-loop probes.
//! - [`trapstatics`]: pseudopotential, secular modes, trap depth, Mathieu
//!   stability.
//! - [`resonator`]: notch and coupled-pair S-parameter models and fitters.
//! - [`gatepower`]: microwave power budgets of the MS and SS gates.
//! - [`gatedynamics`]: time-domain simulation of the SS gate.
//! - [`cli`]: TOML run configs, batch pipelines and manifests behind the
//!   `toolkit` binary.
//!
//! Every capability has a runnable example:
//!
//! ```text
//! cargo run --example coplanar_corner_field
//! cargo run --example microwave_gradient
//! cargo run --example trap_analysis [-- <V_dc>]
//! cargo run --example resonator_fit
//! cargo run --example gate_power_budget
//! cargo run --example ss_gate
//! cargo run --example run_config [-- configs/gate_power.toml]
//! ```

pub mod cli;
pub mod constants;
pub mod error;
pub mod fieldsolver;
pub mod gatedynamics;
pub mod gatepower;
pub mod linalg;
pub mod lsq;
pub mod resonator;
pub mod trapstatics;
pub mod units;

pub use error::{Error, Result};
