//! Physical sanity checks on the field solver against closed-form results.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use sctrap::constants::MU0;
use sctrap::fieldsolver::*;

const LAMBDA: f64 = DEFAULT_LAMBDA0;

fn cpw() -> CrossSectionGeometry {
    CrossSectionGeometry::coplanar(CoplanarDims::new(10e-6, 5e-6, 1.2e-6), LAMBDA)
}

fn solve_cpw(opts: &MeshOptions, current: f64) -> FieldMap {
    let geo = cpw();
    let mesh = Arc::new(build_mesh_with(&geo, opts).unwrap());
    solve_magnetoquasistatic(mesh, &geo, current, 0.0).unwrap()
}

fn max_signal_corner(map: &FieldMap) -> f64 {
    electrode_corner_fields(map, 0, LAMBDA).unwrap().iter().map(|c| c.1).fold(0.0, f64::max)
}

fn volts(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn round_wire_matches_biot_savart() {
    let r = 1e-6;
    // The exterior field does not depend on the London depth; a larger one
    // keeps the polygon's vertex refinement cheap.
    let geo = CrossSectionGeometry::round_wire(r, 48, 0.4e-6);
    let opts = MeshOptions::new(0.2e-6, 1.3).with_domain_factor(100.0).with_max_cell(20e-6).with_focus([-12e-6, 12e-6, -12e-6, 12e-6], 0.25e-6);
    let mesh = Arc::new(build_mesh_with(&geo, &opts).unwrap());
    let map = solve_magnetoquasistatic(mesh, &geo, 1.0, 0.0).unwrap();
    let expected = MU0 / (2.0 * PI * 10e-6);
    for p in [[10e-6, 0.0], [0.0, 10e-6], [-10e-6, 0.0], [7.0710678e-6, -7.0710678e-6]] {
        let b = map.magnitude_at(p).unwrap();
        assert!((b - expected).abs() / expected < 0.01, "|B| at {p:?} = {b:e}, expected {expected:e}");
    }
    // Direction: azimuthal, counter-clockwise for current along +y.
    let v = map.vector_at([10e-6, 0.0]).unwrap();
    assert!(v[0].re.abs() < 0.02 * v[1].re.abs());
}

#[test]
fn corner_field_exceeds_surface_field() {
    let map = solve_cpw(&MeshOptions::new(25e-9, 1.3), 1.0);
    let corner = max_signal_corner(&map);
    let mid_surface = map.magnitude_at([0.0, 1.2e-6 + LAMBDA]).unwrap();
    assert!(corner > 1.5 * mid_surface, "corner {corner:e} T vs mid-strip {mid_surface:e} T");
}

#[test]
fn field_decays_into_the_film_with_the_london_depth() {
    let t = 1.2e-6;
    // Fine lines through the top surface near the strip centre.
    let opts = MeshOptions::new(25e-9, 1.3).with_focus([-0.3e-6, 0.3e-6, t - 0.4e-6, t + 0.05e-6], 5e-9);
    let map = solve_cpw(&opts, 1.0);
    let mesh = map.mesh().clone();
    let i = (0..mesh.nx()).min_by(|&a, &b| mesh.x()[a].abs().total_cmp(&mesh.x()[b].abs())).unwrap();
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 0..mesh.nz() {
        let depth = t - mesh.z()[j];
        if depth < LAMBDA || depth > 5.0 * LAMBDA {
            continue;
        }
        let y = map.magnitude(mesh.node_index(i, j)).ln();
        sx += depth;
        sy += y;
        sxx += depth * depth;
        sxy += depth * y;
        n += 1.0;
    }
    assert!(n >= 20.0, "only {n} samples in the film");
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let expected = -1.0 / LAMBDA;
    assert!((slope - expected).abs() / expected.abs() < 0.02, "slope {slope:e} /m vs {expected:e} /m");
}

#[test]
fn ampere_loops_recover_enclosed_current() {
    let map = solve_cpw(&MeshOptions::new(25e-9, 1.3), 1.0);
    let signal = ampere_loop_integral(&map, [-7.5e-6, 7.5e-6, -2.5e-6, 3.7e-6]).unwrap();
    assert!((signal - 1.0).abs() < 1e-3, "signal loop {signal}");
    let empty = ampere_loop_integral(&map, [-7.2e-6, -5.3e-6, 0.3e-6, 0.9e-6]).unwrap();
    assert!(empty.abs() < 1e-3, "empty loop {empty}");
    let all = ampere_loop_integral(&map, [-250e-6, 250e-6, -100e-6, 100e-6]).unwrap();
    assert!(all.abs() < 1e-3, "loop around every conductor {all}");
}

#[test]
fn response_is_linear_in_current() {
    let opts = MeshOptions::new(25e-9, 1.3);
    let a = solve_cpw(&opts, 1.0);
    let b = solve_cpw(&opts, -2.5);
    let (va, vb) = (a.vector_values().unwrap(), b.vector_values().unwrap());
    let scale = va.iter().map(|v| v[0].norm().max(v[1].norm())).fold(0.0, f64::max);
    for (x, y) in va.iter().zip(vb) {
        for c in 0..2 {
            assert!((y[c] + 2.5 * x[c]).norm() <= 1e-9 * scale);
        }
    }
}

#[test]
fn gradient_flips_with_the_current() {
    let lay = FlipChipLayout::default();
    let geo = lay.microwave(LAMBDA).unwrap();
    let opts = MeshOptions::new(25e-9, 1.3).with_focus([-20e-6, 20e-6, -20e-6, 20e-6], 1e-6);
    let mesh = Arc::new(build_mesh_with(&geo, &opts).unwrap());
    let dir = [36f64.to_radians().cos(), 36f64.to_radians().sin()];
    let g = |i: f64| {
        let map = solve_magnetoquasistatic(mesh.clone(), &geo, i, 0.0).unwrap();
        field_gradient_at(&map, [0.0, 0.0], dir, Component::X).unwrap().re
    };
    let (plus, minus) = (g(1.0), g(-1.0));
    assert!(plus.abs() > 1.0);
    assert!((plus + minus).abs() < 1e-9 * plus.abs());
}

fn trap_solve(opts: &MeshOptions, rf: f64, dc: f64) -> FieldMap {
    let geo = FlipChipLayout::default().electrostatic(LAMBDA).unwrap();
    let mesh = Arc::new(build_mesh_with(&geo, opts).unwrap());
    solve_electrostatic(mesh, &geo, &volts(&[("rf", rf), ("dc", dc)])).unwrap()
}

fn trap_opts(focus_cell: f64) -> MeshOptions {
    MeshOptions::new(25e-9, 1.3).with_focus([-15e-6, 15e-6, -15e-6, 15e-6], focus_cell)
}

#[test]
fn electrostatics_is_odd_and_obeys_the_maximum_principle() {
    let opts = trap_opts(1e-6);
    let p = trap_solve(&opts, 3.0, -1.0).real_values().unwrap();
    let m = trap_solve(&opts, -3.0, 1.0).real_values().unwrap();
    for (a, b) in p.iter().zip(&m) {
        assert!((a + b).abs() <= 1e-9 * 3.0);
    }
    let (lo, hi) = p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(lo >= -1.0 - 1e-9 && hi <= 3.0 + 1e-9, "potential range [{lo}, {hi}]");
}

fn field_null(map: &FieldMap, half: f64) -> [f64; 2] {
    let e = map.electric_field().unwrap();
    let mesh = e.mesh().clone();
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for k in 0..mesh.node_count() {
        let p = mesh.node_point(k);
        if p[0].abs() <= half && p[1].abs() <= half {
            let m = e.magnitude(k);
            if m < best.0 {
                best = (m, p);
            }
        }
    }
    best.1
}

#[test]
fn rf_null_sits_on_the_trap_axis() {
    let coarse = field_null(&trap_solve(&trap_opts(1e-6), 1.0, 0.0), 20e-6);
    assert!(coarse[0].hypot(coarse[1]) < 2e-6, "null at {coarse:?}");
    let fine = field_null(&trap_solve(&trap_opts(0.5e-6), 1.0, 0.0), 20e-6);
    assert!(fine[0].hypot(fine[1]) < 2e-6, "refined null at {fine:?}");
    assert!((fine[0] - coarse[0]).hypot(fine[1] - coarse[1]) < 1.5e-6);
}

#[test]
fn coplanar_preset_mesh_size_is_stable() {
    let mesh = build_mesh(&cpw(), 25e-9, 1.3).unwrap();
    assert_eq!(mesh.node_count(), 30800);
    assert!(mesh.max_growth_ratio() <= 1.3 + 1e-9);
}

#[test]
fn corner_field_is_mesh_converged() {
    let coarse = max_signal_corner(&solve_cpw(&MeshOptions::new(25e-9, 1.3), 1.0));
    let fine = max_signal_corner(&solve_cpw(&MeshOptions::new(12.5e-9, 1.2), 1.0));
    assert!((coarse - fine).abs() / fine < 0.05, "25 nm: {coarse:e} T, 12.5 nm: {fine:e} T");
}

#[test]
fn outer_boundary_is_far_enough() {
    let base = max_signal_corner(&solve_cpw(&MeshOptions::new(25e-9, 1.3), 1.0));
    let doubled = max_signal_corner(&solve_cpw(&MeshOptions::new(25e-9, 1.3).with_domain_factor(10.0), 1.0));
    assert!((base - doubled).abs() / doubled < 0.01, "{base:e} T vs {doubled:e} T");
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn small_wire() -> (CrossSectionGeometry, Arc<Mesh>) {
        let geo = CrossSectionGeometry::round_wire(1e-6, 8, 0.4e-6);
        let opts = MeshOptions::new(0.2e-6, 1.3).with_max_cell(2e-6);
        let mesh = Arc::new(build_mesh_with(&geo, &opts).unwrap());
        (geo, mesh)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn magnetic_solve_scales_with_current(i in -5.0f64..5.0) {
            let (geo, mesh) = small_wire();
            let unit = solve_magnetoquasistatic(mesh.clone(), &geo, 1.0, 0.0).unwrap();
            let scaled = solve_magnetoquasistatic(mesh, &geo, i, 0.0).unwrap();
            let (u, s) = (unit.vector_values().unwrap(), scaled.vector_values().unwrap());
            let peak = u.iter().map(|v| v[0].norm().max(v[1].norm())).fold(0.0, f64::max);
            for (a, b) in u.iter().zip(s) {
                prop_assert!((b[0] - a[0] * i).norm() <= 1e-9 * peak * (1.0 + i.abs()));
                prop_assert!((b[1] - a[1] * i).norm() <= 1e-9 * peak * (1.0 + i.abs()));
            }
        }

        #[test]
        fn electrostatic_solutions_superpose(v1 in -10.0f64..10.0, v2 in -10.0f64..10.0) {
            let geo = FlipChipLayout::default().electrostatic(LAMBDA).unwrap();
            let mesh = Arc::new(build_mesh_with(&geo, &MeshOptions::new(25e-9, 1.3)).unwrap());
            let solve = |rf: f64, dc: f64| solve_electrostatic(mesh.clone(), &geo, &volts(&[("rf", rf), ("dc", dc)])).unwrap().real_values().unwrap();
            let (a, b, both) = (solve(1.0, 0.0), solve(0.0, 1.0), solve(v1, v2));
            let (lo, hi) = (v1.min(v2).min(0.0), v1.max(v2).max(0.0));
            for ((x, y), z) in a.iter().zip(&b).zip(&both) {
                prop_assert!((v1 * x + v2 * y - z).abs() <= 1e-8 * (1.0 + v1.abs() + v2.abs()));
                prop_assert!(*z >= lo - 1e-9 && *z <= hi + 1e-9);
            }
        }
    }
}
