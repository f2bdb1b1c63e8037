//! Structured hexahedral meshes, Q1 shape functions and the DOF map.

pub mod dofmap;
pub mod mesh;
pub mod shape;
pub mod vtk;

pub use dofmap::{
    build_dof_map, dof, BcEntry, BoundaryConditions, Constraint, DofMap, Field, Schedule, Selector, DOFS_PER_NODE,
    THETA,
};
pub use mesh::{build_box_mesh, ElementGeometry, Mesh};
pub use shape::{shape_eval, shape_ref_gradients, shape_values, PointEval, QuadratureRule};
pub use vtk::write_vtk;
