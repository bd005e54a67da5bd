use crate::constants::EV;
use crate::error::{Error, Result};
use crate::fieldsolver::{FieldKind, FieldMap, Point};

struct DisjointSet {
    parent: Vec<usize>,
    touches_boundary: Vec<bool>,
}

impl DisjointSet {
    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
            self.touches_boundary[ra] |= self.touches_boundary[rb];
        }
    }
}

/// Depth of the well around `minimum_location`, in eV.
///
/// Nodes are flooded in order of increasing potential; the depth is the
/// level at which the region connected to the minimum first reaches the
/// mesh boundary, minus the value at the minimum. Flooding node by node
/// gives the exact escape level of the discrete map rather than a value
/// quantized to fixed level steps. Nodes touching a conductor are walls.
pub fn trap_depth(potential: &FieldMap, minimum_location: Point) -> Result<f64> {
    potential.expect_kind(FieldKind::Energy)?;
    let values = potential.real_values()?;
    let mesh = potential.mesh();
    let (nx, nz) = (mesh.nx(), mesh.nz());
    let (ci, cj) = mesh
        .locate(minimum_location)
        .ok_or_else(|| Error::NoTrap("minimum lies outside the mesh".into()))?;
    // The lowest free node among the corners of the containing cell.
    let start = [(ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1)]
        .into_iter()
        .filter(|&(i, j)| mesh.node_electrode(i, j).is_none())
        .min_by(|a, b| values[mesh.node_index(a.0, a.1)].total_cmp(&values[mesh.node_index(b.0, b.1)]))
        .ok_or_else(|| Error::NoTrap("minimum lies inside a conductor".into()))?;
    if mesh.is_boundary_node(start.0, start.1) {
        return Err(Error::NoTrap("minimum lies on the mesh boundary".into()));
    }
    let start = mesh.node_index(start.0, start.1);

    let mut order: Vec<usize> = (0..nx * nz)
        .filter(|&k| {
            let (i, j) = mesh.node_ij(k);
            mesh.node_electrode(i, j).is_none()
        })
        .collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut set = DisjointSet {
        parent: (0..nx * nz).collect(),
        touches_boundary: (0..nx * nz)
            .map(|k| {
                let (i, j) = mesh.node_ij(k);
                mesh.is_boundary_node(i, j)
            })
            .collect(),
    };
    let mut added = vec![false; nx * nz];
    let mut floor = values[start];
    for &k in &order {
        added[k] = true;
        let (i, j) = mesh.node_ij(k);
        let neighbours = [
            (i > 0).then(|| k - 1),
            (i + 1 < nx).then(|| k + 1),
            (j > 0).then(|| k - nx),
            (j + 1 < nz).then(|| k + nx),
        ];
        for n in neighbours.into_iter().flatten() {
            if added[n] {
                set.union(k, n);
            }
        }
        if added[start] {
            let root = set.find(start);
            if set.touches_boundary[root] {
                return Ok((values[k] - floor) / EV);
            }
        } else {
            floor = floor.min(values[k]);
        }
    }
    Err(Error::NoTrap("the well never connects to the mesh boundary".into()))
}
