use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::IonSpecies;
use crate::fieldsolver::{FieldKind, FieldMap, Point};
use crate::error::{Error, Result};

/// Mathieu parameters along one principal axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisMathieu {
    pub a: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MathieuPair {
    pub hf: AxisMathieu,
    pub lf: AxisMathieu,
}

/// Radial mode structure of a trap. Frequencies in rad/s, angles in
/// degrees from the x axis, depth in eV, location in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAnalysis {
    #[serde(rename = "omega_HF_rad_per_s")]
    pub omega_hf: f64,
    #[serde(rename = "omega_LF_rad_per_s")]
    pub omega_lf: f64,
    #[serde(rename = "theta_HF_deg")]
    pub theta_hf: f64,
    #[serde(rename = "theta_LF_deg")]
    pub theta_lf: f64,
    #[serde(rename = "minimum_location_m")]
    pub minimum_location: Point,
    /// Hessian of the potential energy at the minimum, J/m².
    #[serde(rename = "hessian_J_per_m2")]
    pub hessian: [[f64; 2]; 2],
    #[serde(rename = "trap_depth_eV")]
    pub trap_depth: Option<f64>,
    pub mathieu: Option<MathieuPair>,
    pub stable: Option<bool>,
}

impl ModeAnalysis {
    /// Unit vector along the high-frequency axis.
    pub fn hf_axis(&self) -> [f64; 2] {
        let t = self.theta_hf.to_radians();
        [t.cos(), t.sin()]
    }

    pub fn lf_axis(&self) -> [f64; 2] {
        let t = self.theta_lf.to_radians();
        [t.cos(), t.sin()]
    }

    /// Curvature `vᵀHv` of the potential along a unit direction, J/m².
    pub fn curvature_along(&self, v: [f64; 2]) -> f64 {
        let h = self.hessian;
        v[0] * v[0] * h[0][0] + 2.0 * v[0] * v[1] * h[0][1] + v[1] * v[1] * h[1][1]
    }
}

/// Folds an angle in degrees into (−90°, 90°].
pub fn fold_axis_angle(deg: f64) -> f64 {
    let mut a = deg.rem_euclid(180.0);
    if a > 90.0 {
        a -= 180.0;
    }
    if a <= -90.0 {
        a += 180.0;
    }
    a
}

// Monomials of the biquadratic fit in local coordinates.
fn basis(u: f64, v: f64) -> [f64; 9] {
    [1.0, u, v, u * u, u * v, v * v, u * u * v, u * v * v, u * u * v * v]
}

fn fitted_grad_hess(c: &DVector<f64>, u: f64, v: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let gu = c[1] + 2.0 * c[3] * u + c[4] * v + 2.0 * c[6] * u * v + c[7] * v * v + 2.0 * c[8] * u * v * v;
    let gv = c[2] + c[4] * u + 2.0 * c[5] * v + c[6] * u * u + 2.0 * c[7] * u * v + 2.0 * c[8] * u * u * v;
    let huu = 2.0 * c[3] + 2.0 * c[6] * v + 2.0 * c[8] * v * v;
    let hvv = 2.0 * c[5] + 2.0 * c[7] * u + 2.0 * c[8] * u * u;
    let huv = c[4] + 2.0 * c[6] * u + 2.0 * c[7] * v + 4.0 * c[8] * u * v;
    ([gu, gv], [[huu, huv], [huv, hvv]])
}

/// Lowest non-conductor node inside `region`, as `(i, j)`.
pub(crate) fn lowest_node(values: &[f64], map: &FieldMap, region: [f64; 4]) -> Result<(usize, usize)> {
    let mesh = map.mesh();
    let inside = |i: usize, j: usize| {
        let (x, z) = (mesh.x()[i], mesh.z()[j]);
        x >= region[0] && x <= region[1] && z >= region[2] && z <= region[3]
    };
    let mut best: Option<(usize, usize, f64)> = None;
    for j in 0..mesh.nz() {
        for i in 0..mesh.nx() {
            if !inside(i, j) || mesh.node_electrode(i, j).is_some() {
                continue;
            }
            let v = values[mesh.node_index(i, j)];
            if best.is_none_or(|b| v < b.2) {
                best = Some((i, j, v));
            }
        }
    }
    let (i, j, _) = best.ok_or_else(|| Error::NoTrap("search region contains no free mesh node".into()))?;
    let on_edge = i == 0
        || j == 0
        || i + 1 == mesh.nx()
        || j + 1 == mesh.nz()
        || !inside(i - 1, j)
        || !inside(i + 1, j)
        || !inside(i, j - 1)
        || !inside(i, j + 1);
    if on_edge {
        return Err(Error::NoTrap(format!(
            "lowest point ({:.3e}, {:.3e}) m lies on the edge of the search region",
            mesh.x()[i],
            mesh.z()[j]
        )));
    }
    Ok((i, j))
}

/// Secular frequencies and principal axes at the potential minimum.
///
/// The minimum is located on the grid and refined with a biquadratic
/// least-squares fit over the surrounding 5×5 nodes; the Hessian of that
/// fit at its stationary point gives `ω = √(eig/M)`.
pub fn hessian_modes(potential: &FieldMap, ion: &IonSpecies, search_region: [f64; 4]) -> Result<ModeAnalysis> {
    potential.expect_kind(FieldKind::Energy)?;
    let values = potential.real_values()?;
    let mesh = potential.mesh();
    let (i0, j0) = lowest_node(&values, potential, search_region)?;
    if i0 < 2 || j0 < 2 || i0 + 2 >= mesh.nx() || j0 + 2 >= mesh.nz() {
        return Err(Error::NoTrap("minimum too close to the mesh boundary for a 5x5 fit".into()));
    }
    let (xc, zc) = (mesh.x()[i0], mesh.z()[j0]);
    let scale = (mesh.x()[i0 + 2] - mesh.x()[i0 - 2]).max(mesh.z()[j0 + 2] - mesh.z()[j0 - 2]) / 2.0;
    let mut rows = Vec::with_capacity(25 * 9);
    let mut rhs = Vec::with_capacity(25);
    for j in j0 - 2..=j0 + 2 {
        for i in i0 - 2..=i0 + 2 {
            let (u, v) = ((mesh.x()[i] - xc) / scale, (mesh.z()[j] - zc) / scale);
            rows.extend_from_slice(&basis(u, v));
            rhs.push(values[mesh.node_index(i, j)] - values[mesh.node_index(i0, j0)]);
        }
    }
    let a = DMatrix::from_row_slice(25, 9, &rows);
    let b = DVector::from_vec(rhs);
    let c = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::NoTrap(format!("local fit failed: {e}")))?;

    let (mut u, mut v) = (0.0, 0.0);
    for _ in 0..30 {
        let (g, h) = fitted_grad_hess(&c, u, v);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det.abs() < f64::MIN_POSITIVE {
            break;
        }
        let du = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let dv = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        u += du;
        v += dv;
        if du.abs() + dv.abs() < 1e-14 {
            break;
        }
    }
    if !(u.abs() <= 1.0 && v.abs() <= 1.0) {
        // The stationary point of the fit left the stencil; fall back to the node.
        u = 0.0;
        v = 0.0;
    }
    let (_, h) = fitted_grad_hess(&c, u, v);
    let s2 = scale * scale;
    let hessian = [[h[0][0] / s2, h[0][1] / s2], [h[1][0] / s2, h[1][1] / s2]];
    let (l_hi, l_lo, theta_hi) = symmetric_eigen(hessian);
    if !(l_lo > 0.0) {
        return Err(Error::Saddle(l_hi, l_lo));
    }
    let theta_hf = fold_axis_angle(theta_hi);
    Ok(ModeAnalysis {
        omega_hf: (l_hi / ion.mass).sqrt(),
        omega_lf: (l_lo / ion.mass).sqrt(),
        theta_hf,
        theta_lf: fold_axis_angle(theta_hf - 90.0),
        minimum_location: [xc + u * scale, zc + v * scale],
        hessian,
        trap_depth: None,
        mathieu: None,
        stable: None,
    })
}

/// Eigenvalues (larger, smaller) of a symmetric 2×2 matrix and the angle in
/// degrees of the eigenvector belonging to the larger one.
pub fn symmetric_eigen(h: [[f64; 2]; 2]) -> (f64, f64, f64) {
    let (a, b, d) = (h[0][0], 0.5 * (h[0][1] + h[1][0]), h[1][1]);
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    (mean + r, mean - r, theta.to_degrees())
}
