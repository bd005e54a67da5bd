//! Post-processing probes on solved field maps.

use num_complex::Complex64;

use super::fieldmap::{Component, FieldKind, FieldMap};
use super::geometry::Point;
use super::mesh::Material;
use crate::constants::MU0;
use crate::error::{Error, Result};

/// Number of samples on the corner arc.
const ARC_SAMPLES: usize = 65;

/// Peak field near a conductor corner.
///
/// The continuum field diverges at a sharp corner, so the value reported is
/// the largest |B| on a quarter circle of radius `lambda0` centred on the
/// corner and bisected by the outward corner direction. Samples that fall
/// inside a superconductor are skipped.
pub fn corner_field(map: &FieldMap, corner_point: Point, lambda0: f64) -> Result<f64> {
    map.expect_kind(FieldKind::Magnetic)?;
    if !(lambda0 > 0.0) {
        return Err(Error::InvalidCorner("arc radius must be positive".into()));
    }
    let mesh = map.mesh();
    let tol = 1e-9 * (1.0 + corner_point[0].abs().max(corner_point[1].abs())) + 1e-12;
    let corner = mesh
        .corners()
        .iter()
        .find(|c| (c.point[0] - corner_point[0]).abs() <= tol && (c.point[1] - corner_point[1]).abs() <= tol)
        .ok_or_else(|| Error::InvalidCorner(format!("{corner_point:?} is not a conductor vertex")))?;
    let theta0 = corner.outward[1].atan2(corner.outward[0]);
    let mut best: Option<f64> = None;
    for k in 0..ARC_SAMPLES {
        let theta = theta0 - std::f64::consts::FRAC_PI_4
            + std::f64::consts::FRAC_PI_2 * k as f64 / (ARC_SAMPLES - 1) as f64;
        let p = [corner_point[0] + lambda0 * theta.cos(), corner_point[1] + lambda0 * theta.sin()];
        let Some((ci, cj)) = mesh.locate(p) else { continue };
        if mesh.cell_material(ci, cj) == Material::Superconductor {
            continue;
        }
        let b = map.magnitude_at(p)?;
        best = Some(best.map_or(b, |v| v.max(b)));
    }
    best.ok_or_else(|| Error::InvalidCorner("every arc sample lies inside a conductor".into()))
}

/// Every corner of the electrode named by index, with its corner field.
pub fn electrode_corner_fields(map: &FieldMap, electrode: usize, lambda0: f64) -> Result<Vec<(Point, f64)>> {
    map.mesh()
        .corners()
        .iter()
        .filter(|c| c.electrode == electrode)
        .map(|c| Ok((c.point, corner_field(map, c.point, lambda0)?)))
        .collect()
}

/// Directional derivative of one field component.
///
/// Central difference along `direction` with a step equal to the local cell
/// size, using bilinear interpolation between nodes. For scalar maps the
/// component argument is ignored.
pub fn field_gradient_at(map: &FieldMap, point: Point, direction: [f64; 2], component: Component) -> Result<Complex64> {
    let mesh = map.mesh();
    let norm = direction[0].hypot(direction[1]);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidProbe("direction must be a nonzero vector".into()));
    }
    let d = [direction[0] / norm, direction[1] / norm];
    let (ci, cj) = mesh.locate(point).ok_or_else(|| Error::InvalidProbe(format!("{point:?} outside mesh")))?;
    let (ncx, ncz) = (mesh.nx() - 1, mesh.nz() - 1);
    if ci < 2 || cj < 2 || ci + 3 > ncx || cj + 3 > ncz {
        return Err(Error::InvalidProbe(format!("{point:?} within two cells of the mesh boundary")));
    }
    if mesh.cell_material(ci, cj) == Material::Superconductor {
        return Err(Error::InvalidProbe(format!("{point:?} lies inside a superconductor")));
    }
    let h = mesh.local_cell_size(point);
    let value = |p: Point| -> Result<Complex64> {
        if map.kind().is_vector() {
            let v = map.vector_at(p)?;
            Ok(match component {
                Component::X => v[0],
                Component::Z => v[1],
            })
        } else {
            map.scalar_at(p)
        }
    };
    let plus = value([point[0] + h * d[0], point[1] + h * d[1]])?;
    let minus = value([point[0] - h * d[0], point[1] - h * d[1]])?;
    Ok((plus - minus) / (2.0 * h))
}

/// Current enclosed by a rectangular loop `[x0, x1, z0, z1]`, from the
/// counter-clockwise line integral of B (sign such that current along +y
/// is positive). The rectangle is snapped to the nearest mesh lines and
/// integrated with the trapezoid rule on nodal samples.
pub fn ampere_loop_integral(map: &FieldMap, rect: [f64; 4]) -> Result<f64> {
    map.expect_kind(FieldKind::Magnetic)?;
    let mesh = map.mesh();
    let b = map.vector_values()?;
    let [x0, x1, z0, z1] = rect;
    if !(x1 > x0 && z1 > z0) {
        return Err(Error::InvalidLoop("rectangle must have positive extent".into()));
    }
    let bounds = mesh.bounds();
    if !(x0 > bounds[0] && x1 < bounds[1] && z0 > bounds[2] && z1 < bounds[3]) {
        return Err(Error::InvalidLoop("loop must lie strictly inside the mesh".into()));
    }
    let snap = |axis: &[f64], v: f64| {
        axis.iter()
            .enumerate()
            .min_by(|a, b| (a.1 - v).abs().total_cmp(&(b.1 - v).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0)
    };
    let (i0, i1) = (snap(mesh.x(), x0), snap(mesh.x(), x1));
    let (j0, j1) = (snap(mesh.z(), z0), snap(mesh.z(), z1));
    if i1 <= i0 || j1 <= j0 {
        return Err(Error::InvalidLoop("loop collapses on this mesh".into()));
    }
    let mut path = Vec::new();
    path.extend((i0..=i1).map(|i| (i, j0)));
    path.extend((j0 + 1..=j1).map(|j| (i1, j)));
    path.extend((i0..i1).rev().map(|i| (i, j1)));
    path.extend((j0..j1).rev().map(|j| (i0, j)));
    for &(i, j) in &path {
        if mesh.node_electrode(i, j).is_some() {
            return Err(Error::InvalidLoop(format!(
                "loop touches a conductor near ({:.3e}, {:.3e})",
                mesh.x()[i],
                mesh.z()[j]
            )));
        }
    }
    let mut circulation = 0.0;
    for w in path.windows(2) {
        let ((ia, ja), (ib, jb)) = (w[0], w[1]);
        let (pa, pb) = (mesh.node_index(ia, ja), mesh.node_index(ib, jb));
        let dl = [mesh.x()[ib] - mesh.x()[ia], mesh.z()[jb] - mesh.z()[ja]];
        let avg = [(b[pa][0].re + b[pb][0].re) / 2.0, (b[pa][1].re + b[pb][1].re) / 2.0];
        circulation += avg[0] * dl[0] + avg[1] * dl[1];
    }
    Ok(-circulation / MU0)
}
