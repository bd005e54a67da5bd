//! Two-dimensional field solvers on a cross-section normal to the current.
//!
//! * [`solve_magnetoquasistatic`]: London-screened magnetic field of
//!   current-carrying superconducting electrodes.
//! * [`solve_electrostatic`]: Laplace potential of RF/DC electrode sets.
//!
//! Both run on a graded rectilinear [`Mesh`] built by [`build_mesh`] and
//! return an immutable [`FieldMap`]. Probes ([`corner_field`],
//! [`field_gradient_at`], [`ampere_loop_integral`]) read the maps.
//!
//! ```no_run
//! use std::sync::Arc;
//! use sctrap::fieldsolver::*;
//!
//! let geo = CrossSectionGeometry::coplanar(CoplanarDims::new(10e-6, 5e-6, 1.2e-6), DEFAULT_LAMBDA0);
//! let mesh = Arc::new(build_mesh(&geo, 25e-9, 1.3)?);
//! let b = solve_magnetoquasistatic(mesh, &geo, 1.0, 6e9)?;
//! let peak = corner_field(&b, [5e-6, 1.2e-6], geo.lambda0)?;
//! println!("corner field at 1 A: {peak:.3} T");
//! # Ok::<(), sctrap::Error>(())
//! ```

mod fieldmap;
mod geometry;
mod mesh;
mod probes;
mod solver;

pub use fieldmap::{Component, FieldData, FieldKind, FieldMap, FieldMapSidecar, SourceDescriptor};
pub use geometry::{
    default_ground_width, CoplanarDims, CrossSectionGeometry, Electrode, ElectrodeRole, FlipChipLayout, Point,
    Polygon, DEFAULT_LAMBDA0,
};
pub use mesh::{build_mesh, build_mesh_with, Corner, FocusRegion, Material, Mesh, MeshOptions};
pub use probes::{ampere_loop_integral, corner_field, electrode_corner_fields, field_gradient_at};
pub use solver::{solve_electrostatic, solve_magnetoquasistatic};
