//! Trap physics on solved cross-section fields: pseudopotential, total
//! potential, secular modes, depth and Mathieu stability.
//!
//! Potential-energy maps use [`FieldKind::Energy`] (joules per node).
//! The RF field entering [`pseudopotential_map`] is the zero-to-peak
//! amplitude, i.e. the electrostatic solution at the peak RF voltage.

mod depth;
mod mathieu;
mod modes;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use depth::trap_depth;
pub use mathieu::{boundary_a0, boundary_b1, mathieu_a, mathieu_q, stability_check, Stability, SERIES_VALIDITY_Q};
pub use modes::{fold_axis_angle, hessian_modes, symmetric_eigen, AxisMathieu, MathieuPair, ModeAnalysis};

use crate::constants::{ATOMIC_MASS, BE9_ATOMIC_MASS_U, ELECTRON_MASS, ELEMENTARY_CHARGE, EV};
use crate::error::{Error, Result};
use crate::fieldsolver::{FieldKind, FieldMap, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
}

impl IonSpecies {
    pub fn new(name: impl Into<String>, mass: f64, charge: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Configuration("ion mass must be positive".into()));
        }
        if charge == 0.0 || !charge.is_finite() {
            return Err(Error::Configuration("ion charge must be nonzero".into()));
        }
        Ok(Self { name: name.into(), mass, charge })
    }

    /// Singly charged ⁹Be⁺ (atomic mass minus one electron).
    pub fn be9() -> Self {
        Self {
            name: "9Be+".into(),
            mass: BE9_ATOMIC_MASS_U * ATOMIC_MASS - ELECTRON_MASS,
            charge: ELEMENTARY_CHARGE,
        }
    }
}

/// RF drive and DC biases of a trap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapDrive {
    /// rad/s
    pub omega_rf: f64,
    /// Zero-to-peak RF amplitude, V.
    pub v_rf: f64,
    /// DC bias per electrode name or role, V.
    pub dc_biases: BTreeMap<String, f64>,
}

/// Ponderomotive potential `Q²|E|²/(4MΩ²)` of an RF amplitude map.
pub fn pseudopotential_map(e_field: &FieldMap, ion: &IonSpecies, omega_rf: f64) -> Result<FieldMap> {
    e_field.expect_kind(FieldKind::Electric)?;
    if !(omega_rf > 0.0) {
        return Err(Error::Domain("RF drive frequency must be positive".into()));
    }
    let pref = ion.charge * ion.charge / (4.0 * ion.mass * omega_rf * omega_rf);
    let values: Vec<f64> = e_field
        .vector_values()?
        .iter()
        .map(|e| pref * (e[0].norm_sqr() + e[1].norm_sqr()))
        .collect();
    let mut source = e_field.source().clone();
    source.description = format!("pseudopotential of [{}]", source.description);
    FieldMap::from_real_scalar(e_field.mesh().clone(), FieldKind::Energy, values, source)
}

/// `Φ_rf + Q·Φ_dc` node-wise.
pub fn total_potential(pseudo: &FieldMap, dc_potential: &FieldMap, ion: &IonSpecies) -> Result<FieldMap> {
    pseudo.expect_kind(FieldKind::Energy)?;
    dc_potential.expect_kind(FieldKind::Potential)?;
    if !pseudo.mesh().same_grid(dc_potential.mesh()) {
        return Err(Error::Alignment("pseudopotential and DC maps are on different meshes".into()));
    }
    let values: Vec<f64> = pseudo
        .real_values()?
        .iter()
        .zip(dc_potential.real_values()?)
        .map(|(p, v)| p + ion.charge * v)
        .collect();
    let mut source = dc_potential.source().clone();
    source.description = "pseudopotential + DC energy".into();
    FieldMap::from_real_scalar(pseudo.mesh().clone(), FieldKind::Energy, values, source)
}

/// Adds the radial anti-confinement that accompanies an axial DC
/// confinement `ω_ax`: by Laplace's equation the radial curvatures lose
/// `M ω_ax²` in total, split equally between x and z, i.e.
/// `−¼ M ω_ax² ((x−x₀)² + (z−z₀)²)`.
pub fn add_axial_deconfinement(potential: &FieldMap, ion: &IonSpecies, omega_axial: f64, center: Point) -> Result<FieldMap> {
    potential.expect_kind(FieldKind::Energy)?;
    let mesh = potential.mesh();
    let k = 0.25 * ion.mass * omega_axial * omega_axial;
    let values: Vec<f64> = potential
        .real_values()?
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let p = mesh.node_point(n);
            let (dx, dz) = (p[0] - center[0], p[1] - center[1]);
            v - k * (dx * dx + dz * dz)
        })
        .collect();
    let mut source = potential.source().clone();
    source.description = format!("{} with axial deconfinement ({omega_axial:e} rad/s)", source.description);
    FieldMap::from_real_scalar(mesh.clone(), FieldKind::Energy, values, source)
}

/// Inputs to a complete radial analysis.
#[derive(Debug, Clone)]
pub struct TrapInputs<'a> {
    /// RF field amplitude (zero-to-peak).
    pub rf_field: &'a FieldMap,
    /// DC potential with all biases applied, or `None` for a pure RF trap.
    pub dc_potential: Option<&'a FieldMap>,
    pub ion: &'a IonSpecies,
    pub omega_rf: f64,
    /// Axial secular frequency supplied from outside the 2D model.
    pub omega_axial: Option<f64>,
    pub search_region: [f64; 4],
}

/// Full analysis: modes of the total potential, Mathieu q from the
/// pseudopotential alone (projected on the total potential's axes), Mathieu
/// a from the full frequencies, trap depth and stability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrapReport {
    pub modes: ModeAnalysis,
    pub pseudo_only: ModeAnalysis,
    pub stability_hf: Stability,
    pub stability_lf: Stability,
    pub omega_axial: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn analyze_trap(inputs: &TrapInputs<'_>) -> Result<(TrapReport, FieldMap)> {
    let pseudo = pseudopotential_map(inputs.rf_field, inputs.ion, inputs.omega_rf)?;
    let pseudo_only = hessian_modes(&pseudo, inputs.ion, inputs.search_region)?;
    let mut total = match inputs.dc_potential {
        Some(dc) => total_potential(&pseudo, dc, inputs.ion)?,
        None => pseudo.clone(),
    };
    if let Some(w_ax) = inputs.omega_axial {
        total = add_axial_deconfinement(&total, inputs.ion, w_ax, pseudo_only.minimum_location)?;
    }
    let mut modes = hessian_modes(&total, inputs.ion, inputs.search_region)?;
    modes.trap_depth = Some(trap_depth(&total, modes.minimum_location)?);
    let axis_q = |v: [f64; 2]| -> Result<f64> {
        let w = (pseudo_only.curvature_along(v).max(0.0) / inputs.ion.mass).sqrt();
        mathieu_q(w, inputs.omega_rf)
    };
    let q_hf = axis_q(modes.hf_axis())?;
    let q_lf = axis_q(modes.lf_axis())?;
    let hf = AxisMathieu { a: mathieu_a(modes.omega_hf, q_hf, inputs.omega_rf), q: q_hf };
    let lf = AxisMathieu { a: mathieu_a(modes.omega_lf, q_lf, inputs.omega_rf), q: q_lf };
    let stability_hf = stability_check(hf.a, hf.q);
    let stability_lf = stability_check(lf.a, lf.q);
    modes.mathieu = Some(MathieuPair { hf, lf });
    modes.stable = Some(stability_hf.stable && stability_lf.stable);
    let warnings = [&stability_hf, &stability_lf].iter().filter_map(|s| s.warning.clone()).collect();
    Ok((TrapReport { modes, pseudo_only, stability_hf, stability_lf, omega_axial: inputs.omega_axial, warnings }, total))
}

/// Samples an energy map along a line through `center` at `angle_deg`,
/// returning `(offset_m, energy_J)` pairs.
pub fn potential_slice(potential: &FieldMap, center: Point, angle_deg: f64, half_length: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    potential.expect_kind(FieldKind::Energy)?;
    if samples < 2 {
        return Err(Error::Usage("a slice needs at least two samples".into()));
    }
    let t = angle_deg.to_radians();
    (0..samples)
        .map(|k| {
            let s = -half_length + 2.0 * half_length * k as f64 / (samples - 1) as f64;
            let v = potential.scalar_at([center[0] + s * t.cos(), center[1] + s * t.sin()])?.re;
            Ok((s, v))
        })
        .collect()
}

/// Writes a slice as CSV with columns `s_m,potential_meV` (relative to the
/// slice minimum) and returns the path.
pub fn write_slice_csv(slice: &[(f64, f64)], path: &Path) -> Result<()> {
    let floor = slice.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut out = String::from("s_m,potential_meV\n");
    for (s, v) in slice {
        out.push_str(&format!("{:e},{:e}\n", s, (v - floor) / EV * 1e3));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::angular;
    use crate::fieldsolver::{FieldData, Mesh, SourceDescriptor};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn uniform_e(mesh: Arc<Mesh>, e: f64) -> FieldMap {
        let n = mesh.node_count();
        let data = FieldData::Vector(vec![[Complex64::new(e, 0.0), Complex64::new(0.0, 0.0)]; n]);
        FieldMap::new(mesh, FieldKind::Electric, data, 0.0, SourceDescriptor::default(), 0.0).unwrap()
    }

    #[test]
    fn pseudopotential_spot_value() {
        let mesh = Arc::new(Mesh::uniform(0.0, 1.0, 0.0, 1.0, 0.5));
        let ion = IonSpecies::be9();
        let omega = angular(70e6);
        let p = pseudopotential_map(&uniform_e(mesh.clone(), 1e5), &ion, omega).unwrap();
        let v = p.real_values().unwrap()[0];
        let expect = ion.charge * ion.charge * 1e10 / (4.0 * ion.mass * omega * omega);
        assert!((v / expect - 1.0).abs() < 1e-14);
        assert!((v - 2.217e-20).abs() < 0.001e-20, "{v}");
        assert!((v / EV * 1e3 - 138.4).abs() < 0.1);
        let zero = pseudopotential_map(&uniform_e(mesh, 0.0), &ion, omega).unwrap();
        assert!(zero.real_values().unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn total_potential_identities() {
        let mesh = Arc::new(Mesh::uniform(0.0, 1.0, 0.0, 1.0, 0.5));
        let ion = IonSpecies::be9();
        let pseudo = FieldMap::from_fn(mesh.clone(), FieldKind::Energy, |p| p[0] * 1e-21).unwrap();
        let zero_dc = FieldMap::from_fn(mesh.clone(), FieldKind::Potential, |_| 0.0).unwrap();
        let t = total_potential(&pseudo, &zero_dc, &ion).unwrap();
        assert_eq!(t.real_values().unwrap(), pseudo.real_values().unwrap());
        let zero_rf = FieldMap::from_fn(mesh.clone(), FieldKind::Energy, |_| 0.0).unwrap();
        let one_volt = FieldMap::from_fn(mesh, FieldKind::Potential, |_| 1.0).unwrap();
        let t = total_potential(&zero_rf, &one_volt, &ion).unwrap();
        assert!(t.real_values().unwrap().iter().all(|&v| (v - EV).abs() < 1e-30));
        let other = Arc::new(Mesh::uniform(0.0, 2.0, 0.0, 1.0, 0.5));
        let bad = FieldMap::from_fn(other, FieldKind::Potential, |_| 0.0).unwrap();
        assert!(matches!(total_potential(&pseudo, &bad, &ion), Err(Error::Alignment(_))));
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let mesh = Arc::new(Mesh::uniform(0.0, 1.0, 0.0, 1.0, 0.5));
        let phi = FieldMap::from_fn(mesh, FieldKind::Potential, |_| 0.0).unwrap();
        assert!(matches!(
            pseudopotential_map(&phi, &IonSpecies::be9(), 1.0),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn deconfinement_lowers_both_curvatures_by_half_axial() {
        let ion = IonSpecies::be9();
        let mesh = Arc::new(Mesh::uniform(-10e-6, 10e-6, -10e-6, 10e-6, 0.5e-6));
        let w = angular(4.7e6);
        let k = ion.mass * w * w;
        let bowl = FieldMap::from_fn(mesh, FieldKind::Energy, |p| 0.5 * k * (p[0] * p[0] + p[1] * p[1])).unwrap();
        let w_ax = angular(0.93e6);
        let t = add_axial_deconfinement(&bowl, &ion, w_ax, [0.0, 0.0]).unwrap();
        let m = hessian_modes(&t, &ion, [-5e-6, 5e-6, -5e-6, 5e-6]).unwrap();
        let expect = (w * w - 0.5 * w_ax * w_ax).sqrt();
        assert!((m.omega_hf / expect - 1.0).abs() < 1e-9);
        assert!((m.omega_lf / expect - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pseudo_only_frequency_matches_q_definition() {
        // ω from the Hessian and (Ω/2)·q/√2 agree by construction
        let ion = IonSpecies::be9();
        let mesh = Arc::new(Mesh::uniform(-10e-6, 10e-6, -10e-6, 10e-6, 0.5e-6));
        let omega_rf = angular(70e6);
        let w = angular(4.7e6);
        let k = ion.mass * w * w;
        let bowl = FieldMap::from_fn(mesh, FieldKind::Energy, |p| 0.5 * k * (p[0] * p[0] + p[1] * p[1])).unwrap();
        let m = hessian_modes(&bowl, &ion, [-5e-6, 5e-6, -5e-6, 5e-6]).unwrap();
        let q = mathieu_q(m.omega_hf, omega_rf).unwrap();
        assert!((m.omega_hf - omega_rf / 2.0 * q / std::f64::consts::SQRT_2).abs() / m.omega_hf < 1e-9);
    }

    #[test]
    fn slice_is_relative_to_its_minimum() {
        let mesh = Arc::new(Mesh::uniform(-1.0, 1.0, -1.0, 1.0, 0.1));
        let map = FieldMap::from_fn(mesh, FieldKind::Energy, |p| EV * (1.0 + p[0] * p[0])).unwrap();
        let s = potential_slice(&map, [0.0, 0.0], 0.0, 0.5, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("slice.csv");
        write_slice_csv(&s, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("s_m,potential_meV\n"));
        assert!(text.lines().nth(6).unwrap().ends_with(",0e0"));
    }

    proptest! {
        #[test]
        fn pseudopotential_scales_with_voltage_and_frequency(v in 0.1f64..20.0, f in 1e6f64..2e8) {
            let mesh = Arc::new(Mesh::uniform(0.0, 1.0, 0.0, 1.0, 0.5));
            let ion = IonSpecies::be9();
            let base = pseudopotential_map(&uniform_e(mesh.clone(), 1e4), &ion, f).unwrap().real_values().unwrap()[0];
            let hot = pseudopotential_map(&uniform_e(mesh.clone(), 1e4 * v), &ion, f).unwrap().real_values().unwrap()[0];
            let fast = pseudopotential_map(&uniform_e(mesh, 1e4), &ion, 2.0 * f).unwrap().real_values().unwrap()[0];
            prop_assert!((hot / base / (v * v) - 1.0).abs() < 1e-12);
            prop_assert!((fast / base * 4.0 - 1.0).abs() < 1e-12);
        }

        #[test]
        fn frequencies_survive_rotation(angle in 0.0f64..180.0) {
            let ion = IonSpecies::be9();
            let mesh = Arc::new(Mesh::uniform(-20e-6, 20e-6, -20e-6, 20e-6, 0.8e-6));
            let (k1, k2) = (ion.mass * angular(4.8e6).powi(2), ion.mass * angular(4.5e6).powi(2));
            let t = angle.to_radians();
            let f = |p: Point| {
                let s1 = p[0] * t.cos() + p[1] * t.sin();
                let s2 = -p[0] * t.sin() + p[1] * t.cos();
                0.5 * k1 * s1 * s1 + 0.5 * k2 * s2 * s2 + 1e-9 * k1 * s1.powi(3) / 1e-6
            };
            let map = FieldMap::from_fn(mesh, FieldKind::Energy, f).unwrap();
            let m = hessian_modes(&map, &ion, [-8e-6, 8e-6, -8e-6, 8e-6]).unwrap();
            prop_assert!((m.omega_hf / angular(4.8e6) - 1.0).abs() < 5e-3);
            prop_assert!((m.omega_lf / angular(4.5e6) - 1.0).abs() < 5e-3);
        }
    }
}
