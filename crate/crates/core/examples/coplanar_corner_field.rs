//! Corner field of a coplanar waveguide carrying 1 A, and how it falls as
//! the film gets thicker.
//!
//! ```text
//! cargo run --example coplanar_corner_field
//! ```

use std::sync::Arc;

use sctrap::fieldsolver::*;

fn main() -> sctrap::Result<()> {
    let lambda = DEFAULT_LAMBDA0;
    let dims = CoplanarDims::new(10e-6, 5e-6, 1.2e-6);
    let geometry = CrossSectionGeometry::coplanar(dims, lambda);
    let mesh = Arc::new(build_mesh(&geometry, 25e-9, 1.3)?);
    println!("mesh: {} x {} = {} nodes", mesh.nx(), mesh.nz(), mesh.node_count());

    let b = solve_magnetoquasistatic(mesh.clone(), &geometry, 1.0, 1e9)?;
    println!("solver residual {:.1e}", b.residual());
    for (p, field) in electrode_corner_fields(&b, 0, lambda)? {
        println!("  corner ({:+.2}, {:.2}) um: {:.1} mT", p[0] * 1e6, p[1] * 1e6, field * 1e3);
    }

    // A loop around the signal strip must enclose exactly the drive current.
    let enclosed = ampere_loop_integral(&b, [-7.5e-6, 7.5e-6, -2.5e-6, 3.7e-6])?;
    println!("Ampère loop around the signal: {enclosed:.6} A");

    println!("thickness sweep (w = 10 um, s = 5 um):");
    for t in [1e-6, 2e-6, 3e-6, 5e-6] {
        let geo = CrossSectionGeometry::coplanar(CoplanarDims { t, ..dims }, lambda);
        let mesh = Arc::new(build_mesh(&geo, 25e-9, 1.3)?);
        let map = solve_magnetoquasistatic(mesh, &geo, 1.0, 1e9)?;
        let peak = electrode_corner_fields(&map, 0, lambda)?.iter().map(|c| c.1).fold(0.0, f64::max);
        println!("  t = {:.0} um: {:.1} mT", t * 1e6, peak * 1e3);
    }

    let dir = std::env::temp_dir().join("sctrap_coplanar");
    let files = b.export(&dir, "cpw")?;
    println!("field map written to {}", files[0].display());
    Ok(())
}
