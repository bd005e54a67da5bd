//! Finite-volume assembly and the two field solves.
//!
//! Both solves use the node-centred five-point scheme on the graded mesh:
//! the control volume of a node is bounded by the mid-lines of its
//! neighbouring cells, so every cell contributes a quarter of its area and
//! material properties to each of its four corner nodes.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::fieldmap::{nodal_gradient, FieldData, FieldKind, FieldMap, SourceDescriptor};
use super::geometry::{CrossSectionGeometry, ElectrodeRole};
use super::mesh::{Material, Mesh};
use crate::constants::MU0;
use crate::error::{Error, Result};
use crate::linalg::{SpdSolver, StencilMatrix};

/// Maps mesh nodes to unknown indices. Free nodes are numbered along the
/// shorter axis first so the matrix bandwidth is `min(nx, nz)`.
struct Numbering {
    unknown: Vec<usize>,
    count: usize,
}

const FIXED: usize = usize::MAX;

impl Numbering {
    fn new(mesh: &Mesh, is_free: impl Fn(usize, usize) -> bool) -> Self {
        let (nx, nz) = (mesh.nx(), mesh.nz());
        let mut unknown = vec![FIXED; nx * nz];
        let mut count = 0;
        let mut visit = |i: usize, j: usize| {
            if is_free(i, j) {
                unknown[mesh.node_index(i, j)] = count;
                count += 1;
            }
        };
        if nz <= nx {
            for i in 0..nx {
                for j in 0..nz {
                    visit(i, j);
                }
            }
        } else {
            for j in 0..nz {
                for i in 0..nx {
                    visit(i, j);
                }
            }
        }
        Self { unknown, count }
    }

    fn scatter(&self, x: &[f64], fixed: impl Fn(usize) -> f64) -> Vec<f64> {
        self.unknown.iter().enumerate().map(|(k, &u)| if u == FIXED { fixed(k) } else { x[u] }).collect()
    }
}

/// Quarter of the area of cell `(ci, cj)`.
fn quarter_area(mesh: &Mesh, ci: usize, cj: usize) -> f64 {
    0.25 * (mesh.x()[ci + 1] - mesh.x()[ci]) * (mesh.z()[cj + 1] - mesh.z()[cj])
}

/// Visits every mesh edge with its finite-volume conductance
/// `∫ coefficient over the dual face / edge length`.
fn for_each_edge(mesh: &Mesh, coef: impl Fn(usize, usize) -> f64, mut f: impl FnMut(usize, usize, f64)) {
    let (x, z) = (mesh.x(), mesh.z());
    let (nx, nz) = (mesh.nx(), mesh.nz());
    for j in 0..nz {
        for i in 0..nx {
            let p = mesh.node_index(i, j);
            if i + 1 < nx {
                let hx = x[i + 1] - x[i];
                let mut face = 0.0;
                if j > 0 {
                    face += 0.5 * (z[j] - z[j - 1]) * coef(i, j - 1);
                }
                if j + 1 < nz {
                    face += 0.5 * (z[j + 1] - z[j]) * coef(i, j);
                }
                f(p, mesh.node_index(i + 1, j), face / hx);
            }
            if j + 1 < nz {
                let hz = z[j + 1] - z[j];
                let mut face = 0.0;
                if i > 0 {
                    face += 0.5 * (x[i] - x[i - 1]) * coef(i - 1, j);
                }
                if i + 1 < nx {
                    face += 0.5 * (x[i + 1] - x[i]) * coef(i, j);
                }
                f(p, mesh.node_index(i, j + 1), face / hz);
            }
        }
    }
}

/// Assembles the operator over free nodes. Couplings to fixed nodes are
/// returned per free node so callers can build right-hand sides.
fn assemble(
    mesh: &Mesh,
    numbering: &Numbering,
    coef: impl Fn(usize, usize) -> f64,
) -> (StencilMatrix, Vec<Vec<(usize, f64)>>) {
    let mut a = StencilMatrix::new(numbering.count);
    let mut to_fixed = vec![Vec::new(); numbering.count];
    for_each_edge(mesh, coef, |p, q, g| {
        let (up, uq) = (numbering.unknown[p], numbering.unknown[q]);
        match (up != FIXED, uq != FIXED) {
            (true, true) => {
                a.add_diag(up, g);
                a.add_diag(uq, g);
                a.add_sym(up, uq, -g);
            }
            (true, false) => {
                a.add_diag(up, g);
                to_fixed[up].push((q, g));
            }
            (false, true) => {
                a.add_diag(uq, g);
                to_fixed[uq].push((p, g));
            }
            (false, false) => {}
        }
    });
    (a, to_fixed)
}

/// How conductors are tied together in the magnetoquasistatic solve.
#[derive(Debug, Clone, PartialEq)]
struct ConductorGroup {
    label: String,
    electrodes: Vec<usize>,
    current: f64,
}

fn conductor_groups(geometry: &CrossSectionGeometry, total_current: f64) -> Result<Vec<ConductorGroup>> {
    let mut groups = Vec::new();
    let mut driven_sum = 0.0;
    for (k, e) in geometry.electrodes.iter().enumerate() {
        if e.role.is_driven() {
            let current = e.value * total_current;
            driven_sum += current;
            groups.push(ConductorGroup { label: e.name.clone(), electrodes: vec![k], current });
        }
    }
    if groups.is_empty() {
        return Err(Error::Configuration("magnetoquasistatic solve needs a signal (or mw) electrode".into()));
    }
    let grounds: Vec<usize> = (0..geometry.electrodes.len())
        .filter(|&k| geometry.electrodes[k].role == ElectrodeRole::Ground)
        .collect();
    if !grounds.is_empty() {
        groups.push(ConductorGroup { label: "ground".into(), electrodes: grounds, current: -driven_sum });
    }
    for (k, e) in geometry.electrodes.iter().enumerate() {
        if matches!(e.role, ElectrodeRole::Rf | ElectrodeRole::Dc) {
            groups.push(ConductorGroup { label: e.name.clone(), electrodes: vec![k], current: 0.0 });
        }
    }
    Ok(groups)
}

/// Solves for the London-screened field of the assigned currents.
///
/// Every driven electrode (`signal` or `mw`) carries `value × total_current`
/// along +y, all grounds together return the sum, and RF/DC electrodes are
/// floating superconductors with no net current. Inside a superconductor the
/// vector potential obeys `−∇²A + A/λ² = C/λ²`, where the constant `C` of
/// each conductor group is fixed by its net current. The problem is linear:
/// one unit solve per group is superposed with the constants that realise
/// the requested currents, so results scale exactly with `total_current`.
///
/// The superconductor is lossless, so the solution is real; it is stored as
/// complex samples with zero imaginary part. `frequency` only annotates the
/// map (the London response is frequency independent in this regime).
pub fn solve_magnetoquasistatic(
    mesh: Arc<Mesh>,
    geometry: &CrossSectionGeometry,
    total_current: f64,
    frequency: f64,
) -> Result<FieldMap> {
    if !total_current.is_finite() {
        return Err(Error::Configuration("total current must be finite".into()));
    }
    let groups = conductor_groups(geometry, total_current)?;
    let lam2 = geometry.lambda0 * geometry.lambda0;
    let (nx, nz) = (mesh.nx(), mesh.nz());
    if nx < 3 || nz < 3 {
        return Err(Error::InvalidMeshRequest("mesh too small for a solve".into()));
    }
    let numbering = Numbering::new(&mesh, |i, j| !mesh.is_boundary_node(i, j));
    let (mut a, _) = assemble(&mesh, &numbering, |_, _| 1.0);

    let mut group_of_electrode = vec![usize::MAX; geometry.electrodes.len()];
    for (g, group) in groups.iter().enumerate() {
        for &e in &group.electrodes {
            group_of_electrode[e] = g;
        }
    }
    // Quarter-cell superconductor area per free node and group.
    let ng = groups.len();
    let mut weights = vec![vec![0.0; numbering.count]; ng];
    let mut area = vec![0.0; ng];
    for cj in 0..nz - 1 {
        for ci in 0..nx - 1 {
            let Some(e) = mesh.cell_electrode(ci, cj) else { continue };
            let g = group_of_electrode.get(e).copied().unwrap_or(usize::MAX);
            if g == usize::MAX {
                return Err(Error::Alignment("mesh was built for a different geometry".into()));
            }
            let q = quarter_area(&mesh, ci, cj);
            for (i, j) in [(ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1)] {
                area[g] += q;
                let u = numbering.unknown[mesh.node_index(i, j)];
                if u != FIXED {
                    a.add_diag(u, q / lam2);
                    weights[g][u] += q;
                }
            }
        }
    }
    if area.iter().any(|&s| s <= 0.0) {
        return Err(Error::Alignment("a conductor has no cells on this mesh".into()));
    }

    let solver = SpdSolver::new(a)?;
    let mut unit = Vec::with_capacity(ng);
    let mut residual: f64 = 0.0;
    for w in &weights {
        let b: Vec<f64> = w.iter().map(|v| v / lam2).collect();
        let (u, r) = solver.solve(&b)?;
        residual = residual.max(r);
        unit.push(u);
    }
    // Net current of group k for constants C: (Area_k C_k − Σ_g C_g w_k·U_g)/(μ0 λ²).
    let m = DMatrix::from_fn(ng, ng, |k, g| {
        let overlap: f64 = weights[k].iter().zip(&unit[g]).map(|(w, u)| w * u).sum();
        ((if k == g { area[k] } else { 0.0 }) - overlap) / (MU0 * lam2)
    });
    let target = DVector::from_iterator(ng, groups.iter().map(|g| g.current));
    let c = m
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&target))
        .or_else(|| m.lu().solve(&target))
        .ok_or(Error::Convergence { residual: f64::INFINITY })?;

    let mut free = vec![0.0; numbering.count];
    for (g, u) in unit.iter().enumerate() {
        for (f, v) in free.iter_mut().zip(u) {
            *f += c[g] * v;
        }
    }
    let potential: Vec<Complex64> =
        numbering.scatter(&free, |_| 0.0).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let grad = nodal_gradient(&mesh, &potential);
    let b: Vec<[Complex64; 2]> = grad.iter().map(|g| [-g[1], g[0]]).collect();

    let driven: f64 = groups.iter().filter(|g| g.current > 0.0).map(|g| g.current).sum();
    let source = SourceDescriptor {
        description: format!(
            "magnetoquasistatic London solve, lambda0 = {:e} m; groups: {}",
            geometry.lambda0,
            groups.iter().map(|g| format!("{}={:e} A", g.label, g.current)).collect::<Vec<_>>().join(", ")
        ),
        total_current_a: Some(if driven > 0.0 { driven } else { total_current }),
        voltages_v: BTreeMap::new(),
    };
    FieldMap::new(mesh, FieldKind::Magnetic, FieldData::Vector(b), frequency, source, residual)
}

/// Voltage of every electrode: looked up by electrode name, then by role
/// name; grounds default to 0 V.
fn electrode_voltages(geometry: &CrossSectionGeometry, voltages: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    for key in voltages.keys() {
        let known = geometry.electrodes.iter().any(|e| e.name == *key || e.role.as_str() == key);
        if !known {
            return Err(Error::Configuration(format!("voltage given for unknown electrode or role `{key}`")));
        }
    }
    geometry
        .electrodes
        .iter()
        .map(|e| {
            voltages
                .get(&e.name)
                .or_else(|| voltages.get(e.role.as_str()))
                .copied()
                .or((e.role == ElectrodeRole::Ground).then_some(0.0))
                .ok_or_else(|| Error::Configuration(format!("no voltage assigned to electrode `{}`", e.name)))
        })
        .collect()
}

/// Laplace solve with every electrode held at its voltage and the outer
/// boundary grounded. The returned map is the potential; use
/// [`FieldMap::electric_field`] for E.
pub fn solve_electrostatic(
    mesh: Arc<Mesh>,
    geometry: &CrossSectionGeometry,
    voltages: &BTreeMap<String, f64>,
) -> Result<FieldMap> {
    let volts = electrode_voltages(geometry, voltages)?;
    if volts.iter().any(|v| !v.is_finite()) {
        return Err(Error::Configuration("electrode voltages must be finite".into()));
    }
    let mut fixed_value = vec![None; mesh.node_count()];
    for j in 0..mesh.nz() {
        for i in 0..mesh.nx() {
            let k = mesh.node_index(i, j);
            if let Some(e) = mesh.node_electrode(i, j) {
                let v = *volts.get(e).ok_or_else(|| Error::Alignment("mesh was built for a different geometry".into()))?;
                fixed_value[k] = Some(v);
            } else if mesh.is_boundary_node(i, j) {
                fixed_value[k] = Some(0.0);
            }
        }
    }
    let numbering = Numbering::new(&mesh, |i, j| fixed_value[mesh.node_index(i, j)].is_none());
    let (a, to_fixed) = assemble(&mesh, &numbering, |ci, cj| match mesh.cell_material(ci, cj) {
        Material::Superconductor => 1.0,
        _ => mesh.cell_eps(ci, cj),
    });
    let b: Vec<f64> = to_fixed.iter().map(|row| row.iter().map(|&(q, g)| g * fixed_value[q].unwrap_or(0.0)).sum()).collect();
    let (x, residual) = if numbering.count == 0 {
        (Vec::new(), 0.0)
    } else {
        SpdSolver::new(a)?.solve(&b)?
    };
    let phi: Vec<Complex64> = numbering
        .scatter(&x, |k| fixed_value[k].unwrap_or(0.0))
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    let named: BTreeMap<String, f64> =
        geometry.electrodes.iter().zip(&volts).map(|(e, &v)| (e.name.clone(), v)).collect();
    let source = SourceDescriptor {
        description: "electrostatic Laplace solve, grounded outer boundary".into(),
        total_current_a: None,
        voltages_v: named,
    };
    FieldMap::new(mesh, FieldKind::Potential, FieldData::Scalar(phi), 0.0, source, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldsolver::geometry::{Electrode, Polygon};
    use crate::fieldsolver::mesh::build_mesh;

    #[test]
    fn parallel_plates_give_a_linear_potential() {
        // Plates ten gaps wide so the grounded side walls do not reach the centre.
        let d = 100e-6;
        let half = 1e-3;
        let geo = CrossSectionGeometry::new(
            vec![
                Electrode::new("low", ElectrodeRole::Dc, Polygon::rect(-half, half, -2e-6, 0.0), 0.0),
                Electrode::new("high", ElectrodeRole::Dc, Polygon::rect(-half, half, d, d + 2e-6), 1.0),
            ],
            1e-6,
        );
        let x: Vec<f64> = (-42..=42).map(|k| k as f64 * 25e-6).collect();
        let mut z: Vec<f64> = (-4..0).map(|k| k as f64 * 1e-6).collect();
        z.extend((0..=50).map(|k| k as f64 * d / 50.0));
        z.extend((1..=4).map(|k| d + k as f64 * 1e-6));
        let mesh = Arc::new(Mesh::from_lines(&geo, x, z).unwrap());
        let v = BTreeMap::from([("low".to_string(), 0.0), ("high".to_string(), 1.0)]);
        let phi = solve_electrostatic(mesh, &geo, &v).unwrap();
        for zq in [20e-6, 50e-6, 80e-6] {
            let p = phi.scalar_at([0.0, zq]).unwrap().re;
            assert!((p - zq / d).abs() < 1e-3, "phi({zq}) = {p}");
        }
        let e = phi.electric_field().unwrap();
        let mid = e.vector_at([0.0, d / 2.0]).unwrap();
        assert!((mid[1].re + 1e4).abs() / 1e4 < 0.01, "Ez = {}", mid[1].re);
        assert!(mid[0].re.abs() < 1.0);
    }

    #[test]
    fn missing_signal_is_a_configuration_error() {
        let geo = CrossSectionGeometry::new(
            vec![Electrode::new("g", ElectrodeRole::Ground, Polygon::rect(-1e-6, 1e-6, 0.0, 1e-6), 0.0)],
            50e-9,
        );
        let mesh = Arc::new(build_mesh(&geo, 25e-9, 1.5).unwrap());
        assert!(matches!(
            solve_magnetoquasistatic(mesh, &geo, 1.0, 0.0),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn unassigned_electrode_is_rejected() {
        let geo = CrossSectionGeometry::new(
            vec![Electrode::new("rf", ElectrodeRole::Rf, Polygon::rect(-1e-6, 1e-6, 0.0, 1e-6), 0.0)],
            50e-9,
        );
        let mesh = Arc::new(build_mesh(&geo, 25e-9, 1.5).unwrap());
        assert!(matches!(solve_electrostatic(mesh, &geo, &BTreeMap::new()), Err(Error::Configuration(_))));
    }
}
