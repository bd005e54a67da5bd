use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::geometry::Point;
use super::mesh::Mesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Magnetic flux density, tesla.
    Magnetic,
    /// Electric field, V/m.
    Electric,
    /// Electrostatic potential, volts.
    Potential,
    /// Potential energy, joules.
    Energy,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Magnetic => "magnetic",
            FieldKind::Electric => "electric",
            FieldKind::Potential => "potential",
            FieldKind::Energy => "energy",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            FieldKind::Magnetic => "T",
            FieldKind::Electric => "V/m",
            FieldKind::Potential => "V",
            FieldKind::Energy => "J",
        }
    }

    pub fn is_vector(self) -> bool {
        matches!(self, FieldKind::Magnetic | FieldKind::Electric)
    }

    /// CSV value columns of an exported map.
    pub fn column_names(self) -> &'static [&'static str] {
        match self {
            FieldKind::Magnetic => &["Bx_re", "Bx_im", "Bz_re", "Bz_im"],
            FieldKind::Electric => &["Ex_re", "Ex_im", "Ez_re", "Ez_im"],
            FieldKind::Potential => &["phi_re", "phi_im"],
            FieldKind::Energy => &["U_re", "U_im"],
        }
    }
}

/// What drove the solve that produced a map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceDescriptor {
    pub description: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_current_a: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub voltages_v: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Scalar(Vec<Complex64>),
    Vector(Vec<[Complex64; 2]>),
}

/// Complex field samples at every node of a mesh. Immutable once built.
#[derive(Debug, Clone)]
pub struct FieldMap {
    mesh: Arc<Mesh>,
    kind: FieldKind,
    data: FieldData,
    frequency: f64,
    source: SourceDescriptor,
    residual: f64,
}

/// Axis selector for vector components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    X,
    Z,
}

impl FieldMap {
    pub fn new(
        mesh: Arc<Mesh>,
        kind: FieldKind,
        data: FieldData,
        frequency: f64,
        source: SourceDescriptor,
        residual: f64,
    ) -> Result<Self> {
        let len = match &data {
            FieldData::Scalar(v) => {
                if kind.is_vector() {
                    return Err(Error::KindMismatch { expected: "vector data", got: "scalar data" });
                }
                if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::Domain("non-finite field sample".into()));
                }
                v.len()
            }
            FieldData::Vector(v) => {
                if !kind.is_vector() {
                    return Err(Error::KindMismatch { expected: "scalar data", got: "vector data" });
                }
                if v.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::Domain("non-finite field sample".into()));
                }
                v.len()
            }
        };
        if len != mesh.node_count() {
            return Err(Error::Alignment(format!("{len} samples for {} mesh nodes", mesh.node_count())));
        }
        Ok(Self { mesh, kind, data, frequency, source, residual })
    }

    /// Real scalar map.
    pub fn from_real_scalar(mesh: Arc<Mesh>, kind: FieldKind, values: Vec<f64>, source: SourceDescriptor) -> Result<Self> {
        let data = FieldData::Scalar(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect());
        Self::new(mesh, kind, data, 0.0, source, 0.0)
    }

    /// Samples a real scalar function at every node.
    pub fn from_fn(mesh: Arc<Mesh>, kind: FieldKind, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = (0..mesh.node_count()).map(|k| f(mesh.node_point(k))).collect();
        Self::from_real_scalar(mesh, kind, values, SourceDescriptor::default())
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn data(&self) -> &FieldData {
        &self.data
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn source(&self) -> &SourceDescriptor {
        &self.source
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn expect_kind(&self, kind: FieldKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::KindMismatch { expected: kind.name(), got: self.kind.name() })
        }
    }

    pub fn scalar_values(&self) -> Result<&[Complex64]> {
        match &self.data {
            FieldData::Scalar(v) => Ok(v),
            FieldData::Vector(_) => Err(Error::KindMismatch { expected: "scalar", got: self.kind.name() }),
        }
    }

    pub fn vector_values(&self) -> Result<&[[Complex64; 2]]> {
        match &self.data {
            FieldData::Vector(v) => Ok(v),
            FieldData::Scalar(_) => Err(Error::KindMismatch { expected: "vector", got: self.kind.name() }),
        }
    }

    /// Real parts of a scalar map.
    pub fn real_values(&self) -> Result<Vec<f64>> {
        Ok(self.scalar_values()?.iter().map(|c| c.re).collect())
    }

    /// |sample| at a node (Euclidean over components for vector maps).
    pub fn magnitude(&self, node: usize) -> f64 {
        match &self.data {
            FieldData::Scalar(v) => v[node].norm(),
            FieldData::Vector(v) => (v[node][0].norm_sqr() + v[node][1].norm_sqr()).sqrt(),
        }
    }

    /// Map with every sample multiplied by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        let data = match &self.data {
            FieldData::Scalar(v) => FieldData::Scalar(v.iter().map(|c| c * a).collect()),
            FieldData::Vector(v) => FieldData::Vector(v.iter().map(|c| [c[0] * a, c[1] * a]).collect()),
        };
        let mut source = self.source.clone();
        if let Some(i) = source.total_current_a.as_mut() {
            *i *= a;
        }
        source.voltages_v.values_mut().for_each(|v| *v *= a);
        Self { data, source, ..self.clone() }
    }

    /// New map of the same shape with replaced data.
    pub fn with_data(&self, kind: FieldKind, data: FieldData, source: SourceDescriptor) -> Result<Self> {
        Self::new(self.mesh.clone(), kind, data, self.frequency, source, self.residual)
    }

    fn bilinear_weights(&self, p: Point) -> Option<[(usize, f64); 4]> {
        let (ci, cj) = self.mesh.locate(p)?;
        let (x, z) = (self.mesh.x(), self.mesh.z());
        let tx = (p[0] - x[ci]) / (x[ci + 1] - x[ci]);
        let tz = (p[1] - z[cj]) / (z[cj + 1] - z[cj]);
        let m = &self.mesh;
        Some([
            (m.node_index(ci, cj), (1.0 - tx) * (1.0 - tz)),
            (m.node_index(ci + 1, cj), tx * (1.0 - tz)),
            (m.node_index(ci, cj + 1), (1.0 - tx) * tz),
            (m.node_index(ci + 1, cj + 1), tx * tz),
        ])
    }

    /// Bilinear interpolation of a vector map.
    pub fn vector_at(&self, p: Point) -> Result<[Complex64; 2]> {
        let v = self.vector_values()?;
        let w = self.bilinear_weights(p).ok_or_else(|| Error::InvalidProbe(format!("{p:?} outside mesh")))?;
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (k, wk) in w {
            out[0] += v[k][0] * wk;
            out[1] += v[k][1] * wk;
        }
        Ok(out)
    }

    /// Bilinear interpolation of a scalar map.
    pub fn scalar_at(&self, p: Point) -> Result<Complex64> {
        let v = self.scalar_values()?;
        let w = self.bilinear_weights(p).ok_or_else(|| Error::InvalidProbe(format!("{p:?} outside mesh")))?;
        Ok(w.iter().map(|&(k, wk)| v[k] * wk).sum())
    }

    /// Field magnitude at an arbitrary point.
    pub fn magnitude_at(&self, p: Point) -> Result<f64> {
        match self.kind.is_vector() {
            true => {
                let v = self.vector_at(p)?;
                Ok((v[0].norm_sqr() + v[1].norm_sqr()).sqrt())
            }
            false => Ok(self.scalar_at(p)?.norm()),
        }
    }

    /// Nodal gradient `[∂/∂x, ∂/∂z]` of a scalar map, second order in the
    /// interior and one-sided on the domain boundary.
    pub fn nodal_gradient(&self) -> Result<Vec<[Complex64; 2]>> {
        let v = self.scalar_values()?;
        Ok(nodal_gradient(&self.mesh, v))
    }

    /// Electric field `E = −∇φ` of a potential map. Nodes inside conductors get zero.
    pub fn electric_field(&self) -> Result<Self> {
        self.expect_kind(FieldKind::Potential)?;
        let mut g = self.nodal_gradient()?;
        for (k, e) in g.iter_mut().enumerate() {
            let (i, j) = self.mesh.node_ij(k);
            if self.mesh.node_inside_conductor(i, j) {
                *e = [Complex64::new(0.0, 0.0); 2];
            } else {
                *e = [-e[0], -e[1]];
            }
        }
        self.with_data(FieldKind::Electric, FieldData::Vector(g), self.source.clone())
    }

    /// Writes the CSV grid and JSON sidecar `<stem>.csv` / `<stem>.json`,
    /// creating `dir` if needed.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        let mut out = String::new();
        out.push_str("x_m,z_m");
        for c in self.kind.column_names() {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for k in 0..self.mesh.node_count() {
            let p = self.mesh.node_point(k);
            out.push_str(&format!("{:e},{:e}", p[0], p[1]));
            match &self.data {
                FieldData::Scalar(v) => out.push_str(&format!(",{:e},{:e}", v[k].re, v[k].im)),
                FieldData::Vector(v) => {
                    out.push_str(&format!(",{:e},{:e},{:e},{:e}", v[k][0].re, v[k][0].im, v[k][1].re, v[k][1].im))
                }
            }
            out.push('\n');
        }
        std::fs::write(&csv_path, out).map_err(|e| Error::io(&csv_path, e))?;
        let sidecar = FieldMapSidecar {
            kind: self.kind,
            units: self.kind.unit().to_string(),
            coordinate_units: "m".into(),
            frequency_hz: self.frequency,
            source: self.source.clone(),
            solver_residual: self.residual,
            nx: self.mesh.nx(),
            nz: self.mesh.nz(),
            columns: std::iter::once("x_m")
                .chain(std::iter::once("z_m"))
                .chain(self.kind.column_names().iter().copied())
                .map(String::from)
                .collect(),
        };
        let mut f = std::fs::File::create(&json_path).map_err(|e| Error::io(&json_path, e))?;
        serde_json::to_writer_pretty(&mut f, &sidecar)?;
        f.write_all(b"\n").map_err(|e| Error::io(&json_path, e))?;
        Ok(vec![csv_path, json_path])
    }
}

/// JSON sidecar accompanying an exported field map.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldMapSidecar {
    pub kind: FieldKind,
    pub units: String,
    pub coordinate_units: String,
    pub frequency_hz: f64,
    pub source: SourceDescriptor,
    pub solver_residual: f64,
    pub nx: usize,
    pub nz: usize,
    pub columns: Vec<String>,
}

pub(crate) fn derivative(coords: &[f64], values: impl Fn(usize) -> Complex64, i: usize) -> Complex64 {
    let n = coords.len();
    if i == 0 {
        (values(1) - values(0)) / (coords[1] - coords[0])
    } else if i + 1 == n {
        (values(n - 1) - values(n - 2)) / (coords[n - 1] - coords[n - 2])
    } else {
        let (hm, hp) = (coords[i] - coords[i - 1], coords[i + 1] - coords[i]);
        (values(i + 1) * (hm * hm) - values(i - 1) * (hp * hp) + values(i) * (hp * hp - hm * hm))
            / (hm * hp * (hm + hp))
    }
}

pub(crate) fn nodal_gradient(mesh: &Mesh, v: &[Complex64]) -> Vec<[Complex64; 2]> {
    let (nx, nz) = (mesh.nx(), mesh.nz());
    let mut g = vec![[Complex64::new(0.0, 0.0); 2]; nx * nz];
    for j in 0..nz {
        for i in 0..nx {
            let dx = derivative(mesh.x(), |ii| v[mesh.node_index(ii, j)], i);
            let dz = derivative(mesh.z(), |jj| v[mesh.node_index(i, jj)], j);
            g[mesh.node_index(i, j)] = [dx, dz];
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_is_exact_for_quadratics_on_graded_grids() {
        let mut mesh = Mesh::uniform(-1.0, 1.0, -1.0, 1.0, 0.1);
        // distort into a non-uniform grid
        let x: Vec<f64> = mesh.x().iter().map(|&v| v * v.abs().sqrt()).collect();
        let z: Vec<f64> = mesh.z().iter().map(|&v| v + 0.2 * v * v * v).collect();
        mesh = Mesh::from_lines(&crate::fieldsolver::geometry::CrossSectionGeometry::new(Vec::new(), 1.0), x, z).unwrap();
        let mesh = Arc::new(mesh);
        let f = FieldMap::from_fn(mesh.clone(), FieldKind::Potential, |p| 3.0 * p[0] * p[0] - p[0] * p[1] + 2.0 * p[1])
            .unwrap();
        let g = f.nodal_gradient().unwrap();
        for k in 0..mesh.node_count() {
            let (i, j) = mesh.node_ij(k);
            if mesh.is_boundary_node(i, j) {
                continue;
            }
            let p = mesh.node_point(k);
            assert!((g[k][0].re - (6.0 * p[0] - p[1])).abs() < 1e-9);
            assert!((g[k][1].re - (-p[0] + 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn length_mismatch_is_an_alignment_error() {
        let mesh = Arc::new(Mesh::uniform(0.0, 1.0, 0.0, 1.0, 0.5));
        let r = FieldMap::from_real_scalar(mesh, FieldKind::Potential, vec![0.0; 3], SourceDescriptor::default());
        assert!(matches!(r, Err(Error::Alignment(_))));
    }

    #[test]
    fn bilinear_reproduces_linear_fields() {
        let mesh = Arc::new(Mesh::uniform(0.0, 1.0, 0.0, 1.0, 0.25));
        let f = FieldMap::from_fn(mesh, FieldKind::Potential, |p| 2.0 * p[0] - p[1] + 1.0).unwrap();
        let v = f.scalar_at([0.33, 0.71]).unwrap();
        assert!((v.re - (2.0 * 0.33 - 0.71 + 1.0)).abs() < 1e-12);
        assert!(f.scalar_at([1.5, 0.0]).is_err());
    }
}
