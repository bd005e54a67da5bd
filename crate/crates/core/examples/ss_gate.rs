//! Single-sideband gate against its effective Hamiltonian.
//!
//! Evolves |↑↓, 0⟩ for one gate time and reports the Bell-state error,
//! then repeats the comparison for a few carrier/sideband ratios.

use sctrap::gatedynamics::*;

fn main() -> sctrap::Result<()> {
    let cfg = SSDriveConfig::reference(15.0, 10)?;
    println!("{} RK4 steps of {:.2e} s", cfg.steps(), cfg.dt);
    let psi0 = initial_state(cfg.n_max);
    let full = evolve_sampled(&cfg, &psi0, 11)?;
    let ideal = evolve_effective_sampled(&cfg, &psi0, 11)?;
    for (t, s) in full.times.iter().zip(&full.states) {
        let [uu, ud, du, dd] = s.spin_populations();
        println!("  t = {:.3} ms  P = [{uu:.3} {ud:.3} {du:.3} {dd:.3}]", t * 1e3);
    }
    let err = bell_infidelity(&full, &ideal)?;
    println!("infidelity: {:.3e} (spins only {:.3e})", err.full, err.spin);
    println!("concurrence of the final spin state: {:.4}", concurrence(&full.final_state().reduced_spin()));
    println!("norm drift: {:.1e}", full.max_norm_drift());

    for p in infidelity_vs_ratio(&[5.0, 10.0, 20.0, 40.0], &cfg)? {
        println!("  Ω_C/Ω_S = {:>4}: {:.3e}", p.ratio, p.infidelity.full);
    }
    Ok(())
}
