//! Microwave power needed for the MS and SS gates as a function of the
//! resonator quality factors.

use sctrap::gatepower::*;

fn main() -> sctrap::Result<()> {
    let p = GatePhysics::reference();
    println!("per-photon Rabi rates: sideband {:.3e} rad/s, carrier {:.3} rad/s", sideband_rabi_per_photon(&p), carrier_rabi_per_photon(&p));

    println!("{:>10}  {:>12}  {:>10}  {:>12}  {:>10}", "Q_int", "P_MS [mW]", "Q_ext*", "P_SS [mW]", "Q_ext*");
    for q_int in [1e4, 1e5, 1e6, f64::INFINITY] {
        let ms = minimum_power(&p, q_int, Scheme::MS)?;
        let ss = minimum_power(&p, q_int, Scheme::SS)?;
        println!(
            "{q_int:>10.0e}  {:>12.3}  {:>10.1}  {:>12.4}  {:>10.0}",
            ms.p_total * 1e3,
            ms.q_ext,
            ss.p_total * 1e3,
            ss.q_ext
        );
    }

    let map = power_map(&p, &log_grid(1e3, 1e9, 50), &log_grid(1.0, 1e6, 50), Scheme::SS)?;
    let best = map.global_minimum();
    println!("SS grid minimum {:.4} mW at Q_int = {:.1e}, Q_ext = {:.0}", best.p_total * 1e3, best.q_int, best.q_ext);
    let dir = std::env::temp_dir().join("sctrap_power");
    let [csv, _] = map.write(&p, &dir, "power_map_SS")?;
    println!("heatmap data in {}", csv.display());
    Ok(())
}
