//! Field gradient at the trap centre produced by the two microwave
//! conductors of the flip-chip layout, one ampere each along +y.

use std::sync::Arc;

use sctrap::fieldsolver::*;

fn main() -> sctrap::Result<()> {
    let layout = FlipChipLayout::default();
    let geometry = layout.microwave(DEFAULT_LAMBDA0)?;
    // Cells of 1 um around the trap axis keep the finite difference smooth.
    let opts = MeshOptions::new(25e-9, 1.3).with_focus([-20e-6, 20e-6, -20e-6, 20e-6], 1e-6);
    let mesh = Arc::new(build_mesh_with(&geometry, &opts)?);
    let b = solve_magnetoquasistatic(mesh, &geometry, 1.0, 1.074e9)?;

    let centre = [0.0, 0.0];
    let b0 = b.vector_at(centre)?;
    println!("B at the centre: ({:.2e}, {:.2e}) T", b0[0].re, b0[1].re);
    for (name, deg) in [("HF", 36.0f64), ("LF", -53.0)] {
        let d = [deg.to_radians().cos(), deg.to_radians().sin()];
        let g = field_gradient_at(&b, centre, d, Component::X)?;
        println!("dBx/dr along the {name} axis ({deg:+}°): {:.2} T/m per A", g.re);
    }
    Ok(())
}
