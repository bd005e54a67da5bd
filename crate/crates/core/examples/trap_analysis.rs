//! Radial analysis of the flip-chip trap: pseudopotential, secular modes,
//! depth and Mathieu stability.
//!
//! The DC bias is optional; `cargo run --example trap_analysis -- 0.2`
//! adds 0.2 V on the inner DC electrodes.

use std::collections::BTreeMap;
use std::sync::Arc;

use sctrap::constants::{angular, ordinary};
use sctrap::fieldsolver::*;
use sctrap::trapstatics::*;

fn main() -> sctrap::Result<()> {
    let v_dc: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.0);
    let (v_rf, omega_rf) = (10.0, angular(70e6));

    let geometry = FlipChipLayout::default().electrostatic(DEFAULT_LAMBDA0)?;
    let opts = MeshOptions::new(25e-9, 1.3).with_focus([-15e-6, 15e-6, -15e-6, 15e-6], 1e-6);
    let mesh = Arc::new(build_mesh_with(&geometry, &opts)?);
    let volts = |rf: f64, dc: f64| BTreeMap::from([("rf".to_string(), rf), ("dc".to_string(), dc)]);

    let rf_field = solve_electrostatic(mesh.clone(), &geometry, &volts(v_rf, 0.0))?.electric_field()?;
    let dc = solve_electrostatic(mesh, &geometry, &volts(0.0, v_dc))?;
    let ion = IonSpecies::be9();
    let inputs = TrapInputs {
        rf_field: &rf_field,
        dc_potential: (v_dc != 0.0).then_some(&dc),
        ion: &ion,
        omega_rf,
        omega_axial: None,
        search_region: [-20e-6, 20e-6, -20e-6, 20e-6],
    };
    let (report, _total) = match analyze_trap(&inputs) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("no usable trap at {v_dc} V DC: {e}");
            return Ok(());
        }
    };
    let m = &report.modes;
    println!("minimum at ({:.2}, {:.2}) um", m.minimum_location[0] * 1e6, m.minimum_location[1] * 1e6);
    println!("secular: {:.3} MHz at {:.1}°, {:.3} MHz at {:.1}°", ordinary(m.omega_hf) / 1e6, m.theta_hf, ordinary(m.omega_lf) / 1e6, m.theta_lf);
    println!("depth: {:.1} meV", m.trap_depth.unwrap_or(f64::NAN) * 1e3);
    if let Some(mp) = &m.mathieu {
        println!("Mathieu HF: a = {:.2e}, q = {:.3}", mp.hf.a, mp.hf.q);
        println!("Mathieu LF: a = {:.2e}, q = {:.3}", mp.lf.a, mp.lf.q);
    }
    println!("stable: {:?} (margins {:.3} / {:.3})", m.stable, report.stability_hf.margin, report.stability_lf.margin);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
