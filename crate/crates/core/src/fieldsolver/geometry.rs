//! Cross-section geometry: electrode polygons on the (x, z) plane.
//!
//! Current flows along y, normal to the cross-section. Coordinates are in
//! meters; z points away from the substrate.

use serde::{Deserialize, Serialize};

use crate::constants::EPS_SILICON;
use crate::error::{Error, Result};

/// A point `[x, z]` in meters.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElectrodeRole {
    Signal,
    Ground,
    Rf,
    Dc,
    Mw,
}

impl ElectrodeRole {
    pub fn as_str(self) -> &'static str {
        match self {
            ElectrodeRole::Signal => "signal",
            ElectrodeRole::Ground => "ground",
            ElectrodeRole::Rf => "rf",
            ElectrodeRole::Dc => "dc",
            ElectrodeRole::Mw => "mw",
        }
    }

    /// Signal and microwave electrodes carry an imposed current in the
    /// magnetoquasistatic solve.
    pub fn is_driven(self) -> bool {
        matches!(self, ElectrodeRole::Signal | ElectrodeRole::Mw)
    }
}

impl std::str::FromStr for ElectrodeRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "signal" => ElectrodeRole::Signal,
            "ground" => ElectrodeRole::Ground,
            "rf" => ElectrodeRole::Rf,
            "dc" => ElectrodeRole::Dc,
            "mw" => ElectrodeRole::Mw,
            other => return Err(Error::Configuration(format!("unknown electrode role `{other}`"))),
        })
    }
}

/// Simple polygon, vertices in order (either orientation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    /// Axis-aligned rectangle `[x0, x1] × [z0, z1]`.
    pub fn rect(x0: f64, x1: f64, z0: f64, z1: f64) -> Self {
        let (x0, x1) = (x0.min(x1), x0.max(x1));
        let (z0, z1) = (z0.min(z1), z0.max(z1));
        Self { vertices: vec![[x0, z0], [x1, z0], [x1, z1], [x0, z1]] }
    }

    /// Regular `n`-gon inscribed in a circle.
    pub fn circle(center: Point, radius: f64, n: usize) -> Self {
        let vertices = (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            })
            .collect();
        Self { vertices }
    }

    pub fn signed_area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            / 2.0
    }

    pub fn bbox(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for p in &self.vertices {
            bb[0] = bb[0].min(p[0]);
            bb[1] = bb[1].max(p[0]);
            bb[2] = bb[2].min(p[1]);
            bb[3] = bb[3].max(p[1]);
        }
        bb
    }

    /// Even-odd point containment; points on the boundary are unspecified.
    pub fn contains(&self, p: Point) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (v[i], v[j]);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    fn validate(&self, what: &str) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(Error::InvalidGeometry(format!("{what}: polygon needs at least 3 vertices")));
        }
        if self.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry(format!("{what}: non-finite vertex")));
        }
        if self.signed_area().abs() == 0.0 {
            return Err(Error::InvalidGeometry(format!("{what}: zero-area polygon")));
        }
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !adjacent && segments_intersect(edges[i], edges[j]) {
                    return Err(Error::InvalidGeometry(format!("{what}: self-intersecting polygon")));
                }
            }
        }
        Ok(())
    }

    /// True when the interiors of the two polygons overlap.
    fn overlaps(&self, other: &Polygon) -> bool {
        for e in self.edges() {
            for f in other.edges() {
                if segments_cross_properly(e, f) {
                    return true;
                }
            }
        }
        let interior_probe = |poly: &Polygon| -> Point {
            // centroid of the first ear-ish triangle: a point strictly inside for convex polygons
            let v = &poly.vertices;
            let c = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
            if poly.contains(c) {
                c
            } else {
                let n = v.len() as f64;
                [v.iter().map(|p| p[0]).sum::<f64>() / n, v.iter().map(|p| p[1]).sum::<f64>() / n]
            }
        };
        other.contains(interior_probe(self)) || self.contains(interior_probe(other))
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross_properly((a, b): (Point, Point), (c, d): (Point, Point)) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn segments_intersect(e: (Point, Point), f: (Point, Point)) -> bool {
    if segments_cross_properly(e, f) {
        return true;
    }
    let on = |p: Point, (a, b): (Point, Point)| {
        orient(a, b, p) == 0.0
            && p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    on(f.0, e) || on(f.1, e) || on(e.0, f) || on(e.1, f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Electrode {
    pub name: String,
    pub role: ElectrodeRole,
    pub polygon: Polygon,
    /// Current in amperes per unit drive (magnetic solves) or voltage in
    /// volts (electrostatic solves); interpretation depends on the solver.
    pub value: f64,
}

impl Electrode {
    pub fn new(name: impl Into<String>, role: ElectrodeRole, polygon: Polygon, value: f64) -> Self {
        Self { name: name.into(), role, polygon, value }
    }
}

/// Coplanar-waveguide dimensions, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoplanarDims {
    /// Signal strip width.
    pub w: f64,
    /// Gap between signal and ground.
    pub s: f64,
    /// Film thickness.
    pub t: f64,
    /// Width of each finite ground plane.
    pub ground_width: f64,
}

impl CoplanarDims {
    pub fn new(w: f64, s: f64, t: f64) -> Self {
        Self { w, s, t, ground_width: default_ground_width(w, s) }
    }
}

/// Ground planes in the presets are finite; they are made wide enough that
/// the return-current distribution near the gap is insensitive to their width.
pub fn default_ground_width(w: f64, s: f64) -> f64 {
    (4.0 * (w + 2.0 * s)).max(100e-6)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionGeometry {
    pub electrodes: Vec<Electrode>,
    pub substrate: Vec<Polygon>,
    pub eps_substrate: f64,
    /// London penetration depth, meters.
    pub lambda0: f64,
    pub coplanar: Option<CoplanarDims>,
}

/// Default London depth of the reference design.
pub const DEFAULT_LAMBDA0: f64 = 50e-9;

impl CrossSectionGeometry {
    pub fn new(electrodes: Vec<Electrode>, lambda0: f64) -> Self {
        Self { electrodes, substrate: Vec::new(), eps_substrate: 1.0, lambda0, coplanar: None }
    }

    pub fn with_substrate(mut self, region: Polygon, eps: f64) -> Self {
        self.substrate.push(region);
        self.eps_substrate = eps;
        self
    }

    /// Coplanar waveguide on a silicon substrate: signal strip centered at
    /// x = 0 on the substrate surface z = 0, grounds on both sides.
    pub fn coplanar(dims: CoplanarDims, lambda0: f64) -> Self {
        let CoplanarDims { w, s, t, ground_width: g } = dims;
        let gx0 = w / 2.0 + s;
        let electrodes = vec![
            Electrode::new("signal", ElectrodeRole::Signal, Polygon::rect(-w / 2.0, w / 2.0, 0.0, t), 1.0),
            Electrode::new("ground_left", ElectrodeRole::Ground, Polygon::rect(-gx0 - g, -gx0, 0.0, t), 0.0),
            Electrode::new("ground_right", ElectrodeRole::Ground, Polygon::rect(gx0, gx0 + g, 0.0, t), 0.0),
        ];
        let far = 1e3 * (w + 2.0 * s + 2.0 * g);
        let mut geo = Self::new(electrodes, lambda0).with_substrate(Polygon::rect(-far, far, -far, 0.0), EPS_SILICON);
        geo.coplanar = Some(dims);
        geo
    }

    /// Isolated round conductor (polygonal, `n` sides) in vacuum.
    pub fn round_wire(radius: f64, n: usize, lambda0: f64) -> Self {
        Self::new(
            vec![Electrode::new("wire", ElectrodeRole::Signal, Polygon::circle([0.0, 0.0], radius, n), 1.0)],
            lambda0,
        )
    }

    pub fn electrode(&self, name: &str) -> Option<&Electrode> {
        self.electrodes.iter().find(|e| e.name == name)
    }

    /// Bounding box `[x0, x1, z0, z1]` of all electrodes.
    pub fn electrode_bbox(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for e in &self.electrodes {
            let b = e.polygon.bbox();
            bb[0] = bb[0].min(b[0]);
            bb[1] = bb[1].max(b[1]);
            bb[2] = bb[2].min(b[2]);
            bb[3] = bb[3].max(b[3]);
        }
        bb
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 > 0.0) {
            return Err(Error::InvalidGeometry("lambda0 must be positive".into()));
        }
        if !(self.eps_substrate >= 1.0) {
            return Err(Error::InvalidGeometry("substrate permittivity must be >= 1".into()));
        }
        if self.electrodes.is_empty() {
            return Err(Error::InvalidGeometry("no electrodes".into()));
        }
        if let Some(d) = self.coplanar {
            if !(d.w > 0.0 && d.s > 0.0 && d.t > 0.0 && d.ground_width > 0.0) {
                return Err(Error::InvalidGeometry("coplanar w, s, t and ground width must be positive".into()));
            }
        }
        for e in &self.electrodes {
            e.polygon.validate(&e.name)?;
        }
        for (k, p) in self.substrate.iter().enumerate() {
            p.validate(&format!("substrate {k}"))?;
        }
        for i in 0..self.electrodes.len() {
            for j in i + 1..self.electrodes.len() {
                let (a, b) = (&self.electrodes[i], &self.electrodes[j]);
                if a.polygon.overlaps(&b.polygon) {
                    return Err(Error::InvalidGeometry(format!("electrodes `{}` and `{}` overlap", a.name, b.name)));
                }
            }
        }
        Ok(())
    }
}

/// Layout of the flip-chip (two-chip) trap cross-section.
///
/// Electrode surfaces face each other across `chip_gap`; each chip carries,
/// from the trap axis outward, an RF electrode on one side and an inner DC
/// electrode followed by the microwave conductor on the other. The top chip
/// is the bottom chip rotated by 180° about the trap axis, so RF and DC sit
/// diagonally opposite each other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipChipLayout {
    pub chip_gap: f64,
    pub rf_width: f64,
    /// Gap between the RF electrode and its DC neighbour (across the axis).
    pub rf_dc_gap: f64,
    pub dc_width: f64,
    /// Horizontal center-to-center distance between RF and microwave conductors.
    pub rf_mw_distance: f64,
    pub mw_width: f64,
    /// Gap between neighbouring electrodes other than the RF-DC gap.
    pub edge_gap: f64,
    pub ground_width: f64,
    pub film_thickness: f64,
}

impl Default for FlipChipLayout {
    fn default() -> Self {
        Self {
            chip_gap: 100e-6,
            rf_width: 50e-6,
            rf_dc_gap: 5e-6,
            dc_width: 30e-6,
            rf_mw_distance: 80e-6,
            mw_width: 30e-6,
            edge_gap: 5e-6,
            ground_width: 150e-6,
            film_thickness: 1.2e-6,
        }
    }
}

impl FlipChipLayout {
    /// Bottom-chip electrode x-intervals `(name, role, x0, x1)`.
    fn bottom_strips(&self) -> Vec<(&'static str, ElectrodeRole, f64, f64)> {
        let h = self.rf_dc_gap / 2.0;
        let rf = (h, h + self.rf_width);
        let rf_center = (rf.0 + rf.1) / 2.0;
        let mw_center = rf_center - self.rf_mw_distance;
        let mw = (mw_center - self.mw_width / 2.0, mw_center + self.mw_width / 2.0);
        let dc = (-h - self.dc_width, -h);
        let g = self.edge_gap;
        vec![
            ("rf", ElectrodeRole::Rf, rf.0, rf.1),
            ("dc_inner", ElectrodeRole::Dc, dc.0, dc.1),
            ("mw", ElectrodeRole::Mw, mw.0, mw.1),
            ("ground_outer_rf", ElectrodeRole::Ground, rf.1 + g, rf.1 + g + self.ground_width),
            ("ground_outer_mw", ElectrodeRole::Ground, mw.0 - g - self.ground_width, mw.0 - g),
        ]
    }

    fn validate(&self) -> Result<()> {
        let dims = [
            self.chip_gap,
            self.rf_width,
            self.rf_dc_gap,
            self.dc_width,
            self.mw_width,
            self.edge_gap,
            self.ground_width,
            self.film_thickness,
        ];
        if dims.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::InvalidGeometry("flip-chip dimensions must be positive".into()));
        }
        Ok(())
    }

    fn build(&self, keep: impl Fn(ElectrodeRole) -> bool, lambda0: f64) -> Result<CrossSectionGeometry> {
        self.validate()?;
        let zs = self.chip_gap / 2.0;
        let t = self.film_thickness;
        let mut electrodes = Vec::new();
        for (name, role, x0, x1) in self.bottom_strips() {
            if !keep(role) {
                continue;
            }
            electrodes.push(Electrode::new(
                format!("{name}_bottom"),
                role,
                Polygon::rect(x0, x1, -zs - t, -zs),
                if role.is_driven() { 1.0 } else { 0.0 },
            ));
            electrodes.push(Electrode::new(
                format!("{name}_top"),
                role,
                Polygon::rect(-x1, -x0, zs, zs + t),
                if role.is_driven() { 1.0 } else { 0.0 },
            ));
        }
        let far = 100.0 * (self.chip_gap + self.rf_mw_distance + self.ground_width);
        let mut geo = CrossSectionGeometry::new(electrodes, lambda0);
        geo.substrate.push(Polygon::rect(-far, far, -far, -zs - t));
        geo.substrate.push(Polygon::rect(-far, far, zs + t, far));
        geo.eps_substrate = EPS_SILICON;
        geo.validate()?;
        Ok(geo)
    }

    /// Electrostatic cross-section: RF, inner DC and grounded conductors
    /// (microwave conductors act as grounds for the trap fields).
    pub fn electrostatic(&self, lambda0: f64) -> Result<CrossSectionGeometry> {
        let mut geo = self.build(|_| true, lambda0)?;
        for e in &mut geo.electrodes {
            if e.role == ElectrodeRole::Mw {
                e.role = ElectrodeRole::Ground;
            }
        }
        Ok(geo)
    }

    /// Magnetic cross-section of the anti-Helmholtz mode: only the two
    /// microwave conductors, each carrying the unit drive current along +y.
    pub fn microwave(&self, lambda0: f64) -> Result<CrossSectionGeometry> {
        self.build(|r| r == ElectrodeRole::Mw, lambda0)
    }
}
