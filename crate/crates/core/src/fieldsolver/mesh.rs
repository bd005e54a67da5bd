//! Graded rectilinear meshes over a cross-section.
//!
//! Every x and z coordinate of every electrode vertex becomes a mesh line.
//! Around those lines the cell size starts below `target_min_cell` and grows
//! geometrically (ratio ≤ `growth_ratio`) towards `max_cell`. With
//! `target_min_cell ≤ λ/2` this resolves the London layer along every
//! superconductor surface, not only at the corners.

use serde::{Deserialize, Serialize};

use super::geometry::{CrossSectionGeometry, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    Vacuum,
    Substrate,
    Superconductor,
}

/// A vertex of an electrode polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub point: Point,
    pub electrode: usize,
    /// Unit vector bisecting the corner, pointing away from the conductor.
    pub outward: [f64; 2],
    /// Largest mesh cell dimension touching the corner.
    pub local_cell: f64,
}

/// Region where the cell size is capped, e.g. around the trap center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusRegion {
    /// `[x0, x1, z0, z1]`
    pub rect: [f64; 4],
    pub cell: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    pub target_min_cell: f64,
    pub growth_ratio: f64,
    /// Largest cell anywhere; defaults to a quarter of the electrode span.
    pub max_cell: Option<f64>,
    /// Explicit domain `[x0, x1, z0, z1]`; otherwise centered on the
    /// electrodes with half-width `domain_factor` × span.
    pub domain: Option<[f64; 4]>,
    pub domain_factor: f64,
    pub node_budget: usize,
    pub focus: Vec<FocusRegion>,
}

impl MeshOptions {
    pub fn new(target_min_cell: f64, growth_ratio: f64) -> Self {
        Self {
            target_min_cell,
            growth_ratio,
            max_cell: None,
            domain: None,
            domain_factor: 5.0,
            node_budget: 400_000,
            focus: Vec::new(),
        }
    }

    pub fn with_domain_factor(mut self, f: f64) -> Self {
        self.domain_factor = f;
        self
    }

    pub fn with_max_cell(mut self, h: f64) -> Self {
        self.max_cell = Some(h);
        self
    }

    pub fn with_focus(mut self, rect: [f64; 4], cell: f64) -> Self {
        self.focus.push(FocusRegion { rect, cell });
        self
    }

    pub fn with_node_budget(mut self, n: usize) -> Self {
        self.node_budget = n;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    x: Vec<f64>,
    z: Vec<f64>,
    material: Vec<Material>,
    /// Electrode index per cell, `None` for non-conductors.
    electrode: Vec<Option<u32>>,
    eps_substrate: f64,
    corners: Vec<Corner>,
}

/// Builds a mesh with default options (domain 10× the electrode span,
/// cells capped at a quarter span).
pub fn build_mesh(geometry: &CrossSectionGeometry, target_min_cell: f64, growth_ratio: f64) -> Result<Mesh> {
    build_mesh_with(geometry, &MeshOptions::new(target_min_cell, growth_ratio))
}

pub fn build_mesh_with(geometry: &CrossSectionGeometry, opts: &MeshOptions) -> Result<Mesh> {
    geometry.validate()?;
    let h_min = opts.target_min_cell;
    if !(h_min > 0.0) {
        return Err(Error::InvalidMeshRequest("target_min_cell must be positive".into()));
    }
    if h_min > geometry.lambda0 / 2.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidMeshRequest(format!(
            "target_min_cell {h_min:.3e} m exceeds lambda0/2 = {:.3e} m",
            geometry.lambda0 / 2.0
        )));
    }
    if !(opts.growth_ratio > 1.0 && opts.growth_ratio <= 1.5) {
        return Err(Error::InvalidMeshRequest(format!(
            "growth_ratio {} outside (1, 1.5]",
            opts.growth_ratio
        )));
    }
    let bb = geometry.electrode_bbox();
    let span = (bb[1] - bb[0]).max(bb[3] - bb[2]);
    let domain = match opts.domain {
        Some(d) => d,
        None => {
            let (cx, cz) = ((bb[0] + bb[1]) / 2.0, (bb[2] + bb[3]) / 2.0);
            let half = opts.domain_factor * span;
            [cx - half, cx + half, cz - half, cz + half]
        }
    };
    if !(domain[0] < bb[0] && domain[1] > bb[1] && domain[2] < bb[2] && domain[3] > bb[3]) {
        return Err(Error::InvalidMeshRequest("domain must strictly contain every electrode".into()));
    }
    let h_max = opts.max_cell.unwrap_or(span / 4.0).max(h_min);

    let mut fx = Vec::new();
    let mut fz = Vec::new();
    for e in &geometry.electrodes {
        for p in &e.polygon.vertices {
            fx.push(p[0]);
            fz.push(p[1]);
        }
    }
    let focus_x: Vec<_> = opts.focus.iter().map(|f| (f.rect[0], f.rect[1], f.cell)).collect();
    let focus_z: Vec<_> = opts.focus.iter().map(|f| (f.rect[2], f.rect[3], f.cell)).collect();
    let spec_x = AxisSpec { lo: domain[0], hi: domain[1], h_min, ratio: opts.growth_ratio, h_max };
    let spec_z = AxisSpec { lo: domain[2], hi: domain[3], ..spec_x };

    // Cheap size estimate before generating the coordinates.
    let required = spec_x.estimate_lines(&fx, &focus_x) * spec_z.estimate_lines(&fz, &focus_z);
    if required > opts.node_budget {
        return Err(Error::BudgetExceeded { required, budget: opts.node_budget });
    }
    let x = spec_x.generate(&fx, &focus_x);
    let z = spec_z.generate(&fz, &focus_z);
    let required = x.len() * z.len();
    if required > opts.node_budget {
        return Err(Error::BudgetExceeded { required, budget: opts.node_budget });
    }
    Mesh::from_lines(geometry, x, z)
}

impl Mesh {
    /// Uniform grid with spacing `h` (rounded so the lines hit both ends).
    pub fn uniform(x0: f64, x1: f64, z0: f64, z1: f64, h: f64) -> Self {
        let axis = |a: f64, b: f64| {
            let n = ((b - a) / h).round().max(1.0) as usize;
            (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect::<Vec<_>>()
        };
        let (x, z) = (axis(x0, x1), axis(z0, z1));
        let cells = (x.len() - 1) * (z.len() - 1);
        Self {
            x,
            z,
            material: vec![Material::Vacuum; cells],
            electrode: vec![None; cells],
            eps_substrate: 1.0,
            corners: Vec::new(),
        }
    }

    /// Tags cells and corners of `geometry` on the given lines.
    pub fn from_lines(geometry: &CrossSectionGeometry, x: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        for axis in [&x, &z] {
            if axis.len() < 2 || axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidMeshRequest("mesh lines must be strictly increasing".into()));
            }
        }
        let (ncx, ncz) = (x.len() - 1, z.len() - 1);
        let mut material = vec![Material::Vacuum; ncx * ncz];
        let mut electrode = vec![None; ncx * ncz];
        let bboxes: Vec<_> = geometry.electrodes.iter().map(|e| e.polygon.bbox()).collect();
        let sub_bboxes: Vec<_> = geometry.substrate.iter().map(|p| p.bbox()).collect();
        for cj in 0..ncz {
            let zc = 0.5 * (z[cj] + z[cj + 1]);
            for ci in 0..ncx {
                let xc = 0.5 * (x[ci] + x[ci + 1]);
                let k = cj * ncx + ci;
                let inside = |bb: &[f64; 4]| xc > bb[0] && xc < bb[1] && zc > bb[2] && zc < bb[3];
                if let Some(e) = (0..geometry.electrodes.len())
                    .find(|&e| inside(&bboxes[e]) && geometry.electrodes[e].polygon.contains([xc, zc]))
                {
                    material[k] = Material::Superconductor;
                    electrode[k] = Some(e as u32);
                } else if (0..geometry.substrate.len())
                    .any(|s| inside(&sub_bboxes[s]) && geometry.substrate[s].contains([xc, zc]))
                {
                    material[k] = Material::Substrate;
                }
            }
        }
        let mut mesh = Self { x, z, material, electrode, eps_substrate: geometry.eps_substrate, corners: Vec::new() };

        for (ei, e) in geometry.electrodes.iter().enumerate() {
            let bb = bboxes[ei];
            let (xm, zm) = (0.5 * (bb[0] + bb[1]), 0.5 * (bb[2] + bb[3]));
            let count_z = (0..ncz).filter(|&cj| mesh.z[cj] >= bb[2] && mesh.z[cj + 1] <= bb[3]).count();
            let count_x = (0..ncx).filter(|&ci| mesh.x[ci] >= bb[0] && mesh.x[ci + 1] <= bb[1]).count();
            if count_z < 2 || count_x < 2 {
                return Err(Error::InvalidMeshRequest(format!(
                    "electrode `{}` resolved by fewer than 2 cells across (near {xm:.3e}, {zm:.3e})",
                    e.name
                )));
            }
            let v = &e.polygon.vertices;
            let n = v.len();
            for i in 0..n {
                let (p, prev, next) = (v[i], v[(i + n - 1) % n], v[(i + 1) % n]);
                let unit = |a: Point| {
                    let d = [a[0] - p[0], a[1] - p[1]];
                    let l = d[0].hypot(d[1]);
                    [d[0] / l, d[1] / l]
                };
                let (u, w) = (unit(prev), unit(next));
                let mut b = [u[0] + w[0], u[1] + w[1]];
                let bl = b[0].hypot(b[1]);
                b = if bl < 1e-12 { [-u[1], u[0]] } else { [b[0] / bl, b[1] / bl] };
                let eps = 1e-6 * span_of(&bb);
                let outward = if e.polygon.contains([p[0] + eps * b[0], p[1] + eps * b[1]]) { [-b[0], -b[1]] } else { b };
                let local_cell = mesh.local_cell_size(p);
                mesh.corners.push(Corner { point: p, electrode: ei, outward, local_cell });
            }
        }
        Ok(mesh)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn nz(&self) -> usize {
        self.z.len()
    }

    pub fn node_count(&self) -> usize {
        self.x.len() * self.z.len()
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.x.len() + i
    }

    #[inline]
    pub fn node_ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.x.len(), idx / self.x.len())
    }

    pub fn node_point(&self, idx: usize) -> Point {
        let (i, j) = self.node_ij(idx);
        [self.x[i], self.z[j]]
    }

    pub fn bounds(&self) -> [f64; 4] {
        [self.x[0], *self.x.last().unwrap(), self.z[0], *self.z.last().unwrap()]
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    /// Largest corner-adjacent cell dimension over all corners (0 without corners).
    pub fn min_corner_cell(&self) -> f64 {
        self.corners.iter().map(|c| c.local_cell).fold(0.0, f64::max)
    }

    #[inline]
    pub fn cell_index(&self, ci: usize, cj: usize) -> usize {
        cj * (self.x.len() - 1) + ci
    }

    pub fn cell_material(&self, ci: usize, cj: usize) -> Material {
        self.material[self.cell_index(ci, cj)]
    }

    pub fn cell_electrode(&self, ci: usize, cj: usize) -> Option<usize> {
        self.electrode[self.cell_index(ci, cj)].map(|e| e as usize)
    }

    /// Relative permittivity of a cell (conductors report 1).
    pub fn cell_eps(&self, ci: usize, cj: usize) -> f64 {
        match self.cell_material(ci, cj) {
            Material::Substrate => self.eps_substrate,
            _ => 1.0,
        }
    }

    /// Cells `(ci, cj)` around node `(i, j)` that exist.
    pub fn node_cells(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (ncx, ncz) = (self.x.len() - 1, self.z.len() - 1);
        [(i.wrapping_sub(1), j.wrapping_sub(1)), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j)]
            .into_iter()
            .filter(move |&(ci, cj)| ci < ncx && cj < ncz)
    }

    /// Electrode touching node `(i, j)` (first found), if any.
    pub fn node_electrode(&self, i: usize, j: usize) -> Option<usize> {
        self.node_cells(i, j).find_map(|(ci, cj)| self.cell_electrode(ci, cj))
    }

    /// True when every cell around the node is superconductor.
    pub fn node_inside_conductor(&self, i: usize, j: usize) -> bool {
        self.node_cells(i, j).all(|(ci, cj)| self.cell_material(ci, cj) == Material::Superconductor)
    }

    pub fn is_boundary_node(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.x.len() || j + 1 == self.z.len()
    }

    /// Cell containing `p` (points on lines go to the upper/right cell).
    pub fn locate(&self, p: Point) -> Option<(usize, usize)> {
        Some((locate_axis(&self.x, p[0])?, locate_axis(&self.z, p[1])?))
    }

    /// Largest dimension among the cells touching `p`.
    pub fn local_cell_size(&self, p: Point) -> f64 {
        let mut h: f64 = 0.0;
        for dx in [-1e-12, 1e-12] {
            for dz in [-1e-12, 1e-12] {
                let q = [p[0] + dx * (1.0 + p[0].abs()), p[1] + dz * (1.0 + p[1].abs())];
                if let Some((ci, cj)) = self.locate(q) {
                    h = h.max(self.x[ci + 1] - self.x[ci]).max(self.z[cj + 1] - self.z[cj]);
                }
            }
        }
        h
    }

    /// Largest ratio between neighbouring cell widths on either axis.
    pub fn max_growth_ratio(&self) -> f64 {
        [&self.x, &self.z]
            .iter()
            .flat_map(|a| {
                a.windows(3).map(|w| {
                    let (h0, h1) = (w[1] - w[0], w[2] - w[1]);
                    (h1 / h0).max(h0 / h1)
                })
            })
            .fold(1.0, f64::max)
    }

    pub fn same_grid(&self, other: &Mesh) -> bool {
        self.x == other.x && self.z == other.z
    }
}

fn span_of(bb: &[f64; 4]) -> f64 {
    (bb[1] - bb[0]).max(bb[3] - bb[2])
}

fn locate_axis(a: &[f64], v: f64) -> Option<usize> {
    let n = a.len();
    if !(v >= a[0] && v <= a[n - 1]) {
        return None;
    }
    let k = a.partition_point(|&c| c <= v);
    Some(k.saturating_sub(1).min(n - 2))
}

#[derive(Debug, Clone, Copy)]
struct AxisSpec {
    lo: f64,
    hi: f64,
    h_min: f64,
    ratio: f64,
    h_max: f64,
}

impl AxisSpec {
    /// Target size at `x`. Growing linearly with slope ln(r) and starting at
    /// `h·ln(r)/(r−1)` makes equal-integral cells grow by at most `r` with the
    /// first cell no larger than `h`.
    fn size(&self, x: f64, features: &[f64], focus: &[(f64, f64, f64)]) -> f64 {
        let slope = self.ratio.ln();
        let k = slope / (self.ratio - 1.0);
        let mut h = self.h_max;
        for &f in features {
            h = h.min(self.h_min * k + slope * (x - f).abs());
        }
        for &(a, b, hf) in focus {
            let d = if x < a { a - x } else if x > b { x - b } else { 0.0 };
            h = h.min(hf * k + slope * d);
        }
        h
    }

    fn breakpoints(&self, features: &[f64], focus: &[(f64, f64, f64)]) -> Vec<f64> {
        let mut pts: Vec<f64> = features
            .iter()
            .copied()
            .chain(focus.iter().flat_map(|&(a, b, _)| [a, b]))
            .filter(|&v| v > self.lo && v < self.hi)
            .collect();
        pts.push(self.lo);
        pts.push(self.hi);
        pts.sort_by(f64::total_cmp);
        let tol = 1e-9 * self.h_min;
        pts.dedup_by(|a, b| (*a - *b).abs() <= tol);
        pts
    }

    fn segment_integral(&self, p: f64, q: f64, features: &[f64], focus: &[(f64, f64, f64)]) -> Vec<(f64, f64)> {
        // cumulative ∫ dx/h sampled at sub-steps of h/24
        let mut table = vec![(p, 0.0)];
        let (mut x, mut acc) = (p, 0.0);
        while x < q {
            let h = self.size(x, features, focus);
            let step = (h / 24.0).min(q - x);
            let mid = self.size(x + step / 2.0, features, focus);
            acc += step / mid;
            x = if q - (x + step) < 1e-12 * h { q } else { x + step };
            table.push((x, acc));
        }
        table
    }

    fn estimate_lines(&self, features: &[f64], focus: &[(f64, f64, f64)]) -> usize {
        // analytic upper bound: every breakpoint grows cells on both sides
        let pts = self.breakpoints(features, focus);
        let slope = self.ratio.ln();
        let mut total = 1.0;
        for w in pts.windows(2) {
            let len = w[1] - w[0];
            let h0 = self.h_min * slope / (self.ratio - 1.0);
            let growth = 2.0 * ((1.0 + slope * len / 2.0 / h0).ln() / slope);
            total += growth.min(len / self.h_min).max(len / self.h_max).ceil() + 1.0;
        }
        total as usize
    }

    fn generate(&self, features: &[f64], focus: &[(f64, f64, f64)]) -> Vec<f64> {
        let pts = self.breakpoints(features, focus);
        let mut lines = vec![pts[0]];
        for w in pts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let table = self.segment_integral(p, q, features, focus);
            let total = table.last().unwrap().1;
            let n = (total - 1e-9).ceil().max(1.0) as usize;
            let mut t = 0;
            for k in 1..n {
                let target = total * k as f64 / n as f64;
                while table[t + 1].1 < target {
                    t += 1;
                }
                let ((x0, a0), (x1, a1)) = (table[t], table[t + 1]);
                lines.push(x0 + (x1 - x0) * (target - a0) / (a1 - a0));
            }
            lines.push(q);
        }
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldsolver::geometry::{CoplanarDims, Electrode, ElectrodeRole, Polygon, DEFAULT_LAMBDA0};

    #[test]
    fn uniform_square_has_eleven_lines() {
        let m = Mesh::uniform(0.0, 10e-6, 0.0, 10e-6, 1e-6);
        assert_eq!(m.nx(), 11);
        assert_eq!(m.nz(), 11);
    }

    #[test]
    fn coplanar_corners_are_resolved() {
        let geo = CrossSectionGeometry::coplanar(CoplanarDims::new(10e-6, 5e-6, 1.2e-6), DEFAULT_LAMBDA0);
        let mesh = build_mesh(&geo, 25e-9, 1.3).unwrap();
        let signal: Vec<_> = mesh.corners().iter().filter(|c| c.electrode == 0).collect();
        assert_eq!(signal.len(), 4);
        for c in signal {
            assert!(c.local_cell <= 25e-9 * (1.0 + 1e-9), "corner cell {}", c.local_cell);
        }
        assert!(mesh.max_growth_ratio() <= 1.3 + 1e-6, "ratio {}", mesh.max_growth_ratio());
    }

    #[test]
    fn mesh_is_deterministic() {
        let geo = CrossSectionGeometry::coplanar(CoplanarDims::new(10e-6, 5e-6, 1.2e-6), DEFAULT_LAMBDA0);
        let a = build_mesh(&geo, 25e-9, 1.3).unwrap();
        let b = build_mesh(&geo, 25e-9, 1.3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_requests() {
        let geo = CrossSectionGeometry::coplanar(CoplanarDims::new(10e-6, 5e-6, 1.2e-6), DEFAULT_LAMBDA0);
        assert!(matches!(build_mesh(&geo, 30e-9, 1.3), Err(Error::InvalidMeshRequest(_))));
        assert!(matches!(build_mesh(&geo, 25e-9, 1.6), Err(Error::InvalidMeshRequest(_))));
        assert!(matches!(build_mesh(&geo, 25e-9, 1.0), Err(Error::InvalidMeshRequest(_))));
        let tight = MeshOptions::new(25e-9, 1.3).with_node_budget(1000);
        match build_mesh_with(&geo, &tight) {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert_eq!(budget, 1000);
                assert!(required > 1000);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn cells_are_tagged() {
        let geo = CrossSectionGeometry::new(
            vec![Electrode::new("s", ElectrodeRole::Signal, Polygon::rect(-1e-6, 1e-6, 0.0, 1e-6), 1.0)],
            1e-6,
        )
        .with_substrate(Polygon::rect(-1.0, 1.0, -1.0, 0.0), 11.9);
        let mesh = build_mesh(&geo, 0.2e-6, 1.3).unwrap();
        let (ci, cj) = mesh.locate([0.0, 0.5e-6]).unwrap();
        assert_eq!(mesh.cell_material(ci, cj), Material::Superconductor);
        let (ci, cj) = mesh.locate([0.0, -0.5e-6]).unwrap();
        assert_eq!(mesh.cell_material(ci, cj), Material::Substrate);
        assert_eq!(mesh.cell_eps(ci, cj), 11.9);
        let (ci, cj) = mesh.locate([0.0, 3e-6]).unwrap();
        assert_eq!(mesh.cell_material(ci, cj), Material::Vacuum);
    }
}
