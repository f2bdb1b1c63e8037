//! Monolithic GDSW-type coarse spaces.

pub mod basis;
pub mod config;

pub use basis::{
    extend, extension_residuals, galerkin, interface_values, CoarseBasis, ColumnInfo, DofRole, DofRoles, Mode,
    SparseColumn, DISPLACEMENT_MODES,
};
pub use config::CoarseConfig;

use crate::decomposition::ComponentSet;
use crate::error::Result;
use crate::fem::Mesh;
use crate::linalg::CsrMatrix;

/// Interface values, extension, cross-field removal and truncation, in that
/// order.
pub fn build_coarse_basis(
    k: &CsrMatrix,
    mesh: &Mesh,
    roles: &DofRoles,
    u_components: &ComponentSet,
    t_components: &ComponentSet,
    config: &CoarseConfig,
) -> Result<CoarseBasis> {
    let gamma = interface_values(u_components, t_components, config, mesh, roles);
    let mut phi = extend(k, roles, &gamma)?;
    phi.remove_cross_field();
    phi.truncate(config.truncation);
    Ok(phi)
}
