//! Coarse basis construction: interface values, extension, block removal,
//! truncation and the Galerkin product.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::config::CoarseConfig;
use crate::decomposition::{ComponentSet, Partition};
use crate::error::Result;
use crate::fem::{dof, Field, Mesh, DOFS_PER_NODE, THETA};
use crate::linalg::{CsrMatrix, SparseLu};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Tx,
    Ty,
    Tz,
    R1,
    R2,
    R3,
    Theta,
}

pub const DISPLACEMENT_MODES: [Mode; 6] = [Mode::Tx, Mode::Ty, Mode::Tz, Mode::R1, Mode::R2, Mode::R3];

impl Mode {
    /// Displacement of the mode at offset `x` from the rotation center.
    pub fn displacement(self, x: [f64; 3]) -> [f64; 3] {
        match self {
            Mode::Tx => [1.0, 0.0, 0.0],
            Mode::Ty => [0.0, 1.0, 0.0],
            Mode::Tz => [0.0, 0.0, 1.0],
            Mode::R1 => [x[1], -x[0], 0.0],
            Mode::R2 => [-x[2], 0.0, x[0]],
            Mode::R3 => [0.0, x[2], -x[1]],
            Mode::Theta => [0.0; 3],
        }
    }

    /// Displacement components the mode acts on.
    pub fn axes(self) -> &'static [usize] {
        match self {
            Mode::Tx => &[0],
            Mode::Ty => &[1],
            Mode::Tz => &[2],
            Mode::R1 => &[0, 1],
            Mode::R2 => &[0, 2],
            Mode::R3 => &[1, 2],
            Mode::Theta => &[],
        }
    }

    pub fn field(self) -> Field {
        if self == Mode::Theta {
            Field::Temperature
        } else {
            Field::Displacement
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ColumnInfo {
    pub field: Field,
    /// Index into the field's component set.
    pub component: usize,
    pub mode: Mode,
}

/// `(row, value)` sorted by row.
pub type SparseColumn = Vec<(usize, f64)>;

#[derive(Clone, Debug, PartialEq)]
pub struct CoarseBasis {
    pub num_dofs: usize,
    pub columns: Vec<SparseColumn>,
    pub info: Vec<ColumnInfo>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofRole {
    /// Dirichlet DOF, identity row in the operator.
    Fixed,
    Interface,
    Interior(usize),
}

/// Role of every DOF with respect to a partition. Free DOFs of nodes shared
/// by several subdomains are interface DOFs; the others are interior to the
/// single subdomain containing their node.
#[derive(Clone, Debug)]
pub struct DofRoles {
    roles: Vec<DofRole>,
    interior: Vec<Vec<usize>>,
    /// Interface DOFs of each subdomain closure.
    interface: Vec<Vec<usize>>,
}

impl DofRoles {
    pub fn new(mesh: &Mesh, partition: &Partition, fixed: &[bool]) -> Self {
        let nn = mesh.num_nodes();
        assert_eq!(fixed.len(), DOFS_PER_NODE * nn);
        let ns = partition.num_subdomains();
        let mut roles = vec![DofRole::Fixed; fixed.len()];
        let mut interior = vec![Vec::new(); ns];
        let mut interface = vec![Vec::new(); ns];
        for n in 0..nn {
            let subs = partition.node_subdomains(n);
            for c in 0..DOFS_PER_NODE {
                let d = dof(n, c);
                if fixed[d] {
                    continue;
                }
                if subs.len() == 1 {
                    roles[d] = DofRole::Interior(subs[0]);
                    interior[subs[0]].push(d);
                } else {
                    roles[d] = DofRole::Interface;
                    for &s in subs {
                        interface[s].push(d);
                    }
                }
            }
        }
        Self { roles, interior, interface }
    }

    pub fn role(&self, d: usize) -> DofRole {
        self.roles[d]
    }

    pub fn is_interface(&self, d: usize) -> bool {
        self.roles[d] == DofRole::Interface
    }

    pub fn interior_of(&self, s: usize) -> &[usize] {
        &self.interior[s]
    }

    pub fn interface_of(&self, s: usize) -> &[usize] {
        &self.interface[s]
    }

    pub fn num_subdomains(&self) -> usize {
        self.interior.len()
    }

    pub fn interface_dofs(&self) -> Vec<usize> {
        (0..self.roles.len()).filter(|&d| self.is_interface(d)).collect()
    }

    pub fn interior_dofs(&self) -> Vec<usize> {
        (0..self.roles.len()).filter(|&d| matches!(self.roles[d], DofRole::Interior(_))).collect()
    }
}

/// Null-space modes restricted to each component, scaled by the node
/// weights and supported on interface DOFs only. Columns whose DOFs are all
/// constrained are dropped.
pub fn interface_values(
    u_components: &ComponentSet,
    t_components: &ComponentSet,
    config: &CoarseConfig,
    mesh: &Mesh,
    roles: &DofRoles,
) -> CoarseBasis {
    let center = config.rotation_center.unwrap_or_else(|| mesh.centroid());
    let modes = &DISPLACEMENT_MODES[..config.displacement_modes()];
    let mut columns = Vec::new();
    let mut info = Vec::new();
    for (ci, comp) in u_components.components.iter().enumerate() {
        for &mode in modes {
            let mut col = SparseColumn::new();
            let mut free = false;
            for &(n, w) in &comp.nodes {
                let x = mesh.coord(n);
                let v = mode.displacement([x[0] - center[0], x[1] - center[1], x[2] - center[2]]);
                for &axis in mode.axes() {
                    let d = dof(n, axis);
                    if roles.is_interface(d) {
                        free = true;
                        if v[axis] != 0.0 {
                            col.push((d, w * v[axis]));
                        }
                    }
                }
            }
            // a rotation may vanish on a component through the center; it is
            // kept so that the coarse dimension only depends on constraints
            if free {
                columns.push(col);
                info.push(ColumnInfo { field: Field::Displacement, component: ci, mode });
            }
        }
    }
    for (ci, comp) in t_components.components.iter().enumerate() {
        let col: SparseColumn =
            comp.nodes.iter().map(|&(n, w)| (dof(n, THETA), w)).filter(|&(d, _)| roles.is_interface(d)).collect();
        if !col.is_empty() {
            columns.push(col);
            info.push(ColumnInfo { field: Field::Temperature, component: ci, mode: Mode::Theta });
        }
    }
    CoarseBasis { num_dofs: roles.roles.len(), columns, info }
}

/// Row-wise view of the basis restricted to `rows`: for every listed row the
/// `(column, value)` pairs.
fn rows_of(basis: &CoarseBasis) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); basis.num_dofs];
    for (j, col) in basis.columns.iter().enumerate() {
        for &(r, v) in col {
            rows[r].push((j, v));
        }
    }
    rows
}

/// Discrete extension `φ_I = −K_II⁻¹ K_IΓ φ_Γ`, one factorization per
/// subdomain interior block.
pub fn extend(k: &CsrMatrix, roles: &DofRoles, gamma: &CoarseBasis) -> Result<CoarseBasis> {
    let by_row = rows_of(gamma);
    let per_sub: Vec<Vec<(usize, usize, f64)>> = (0..roles.num_subdomains())
        .into_par_iter()
        .map(|s| extend_subdomain(k, roles, &by_row, s))
        .collect::<Result<_>>()?;
    let mut columns = gamma.columns.clone();
    for entries in per_sub {
        for (j, r, v) in entries {
            columns[j].push((r, v));
        }
    }
    for col in &mut columns {
        col.sort_by_key(|&(r, _)| r);
    }
    Ok(CoarseBasis { num_dofs: gamma.num_dofs, columns, info: gamma.info.clone() })
}

fn extend_subdomain(
    k: &CsrMatrix,
    roles: &DofRoles,
    by_row: &[Vec<(usize, f64)>],
    s: usize,
) -> Result<Vec<(usize, usize, f64)>> {
    let interior = roles.interior_of(s);
    let gamma_dofs = roles.interface_of(s);
    let ni = interior.len();
    if ni == 0 {
        return Ok(Vec::new());
    }
    // columns with support on this closure, in increasing order
    let mut cols: Vec<usize> = gamma_dofs.iter().flat_map(|&g| by_row[g].iter().map(|&(j, _)| j)).collect();
    cols.sort_unstable();
    cols.dedup();
    if cols.is_empty() {
        return Ok(Vec::new());
    }
    let local_col = |j: usize| cols.binary_search(&j).expect("column gathered above");
    let k_ig = k.submatrix(interior, gamma_dofs);
    let mut rhs = vec![0.0; ni * cols.len()];
    for r in 0..ni {
        let (gc, gv) = k_ig.row(r);
        for (&g, &kv) in gc.iter().zip(gv) {
            for &(j, phi) in &by_row[gamma_dofs[g]] {
                rhs[local_col(j) * ni + r] -= kv * phi;
            }
        }
    }
    let k_ii = k.submatrix(interior, interior);
    let lu = SparseLu::factor(&k_ii, &format!("interior block of subdomain {s}"))?;
    lu.solve_columns_in_place(&mut rhs, cols.len());
    let mut out = Vec::new();
    for (lj, &j) in cols.iter().enumerate() {
        for r in 0..ni {
            let v = rhs[lj * ni + r];
            if v != 0.0 {
                out.push((j, interior[r], v));
            }
        }
    }
    Ok(out)
}

/// Relative residual `‖K_II φ_I + K_IΓ φ_Γ‖ / ‖K_IΓ φ_Γ‖` per column, with
/// `K_IΓ φ_Γ` from the interface part of the column.
pub fn extension_residuals(k: &CsrMatrix, roles: &DofRoles, extended: &CoarseBasis) -> Vec<f64> {
    let interior = roles.interior_dofs();
    extended
        .columns
        .par_iter()
        .map(|col| {
            let mut full = vec![0.0; extended.num_dofs];
            let mut face = vec![0.0; extended.num_dofs];
            for &(r, v) in col {
                full[r] = v;
                if roles.is_interface(r) {
                    face[r] = v;
                }
            }
            let kf = k.mul_vec(&full);
            let kg = k.mul_vec(&face);
            let num: f64 = interior.iter().map(|&r| kf[r] * kf[r]).sum::<f64>().sqrt();
            let den: f64 = interior.iter().map(|&r| kg[r] * kg[r]).sum::<f64>().sqrt();
            if den == 0.0 {
                num
            } else {
                num / den
            }
        })
        .collect()
}

impl CoarseBasis {
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn count(&self, field: Field) -> usize {
        self.info.iter().filter(|i| i.field == field).count()
    }

    /// Zeroes the entries of each column outside its own field.
    pub fn remove_cross_field(&mut self) {
        for (col, info) in self.columns.iter_mut().zip(&self.info) {
            col.retain(|&(r, _)| Field::of_component(r % DOFS_PER_NODE) == info.field);
        }
    }

    /// Drops entries with `|v| < tol`; metadata is kept.
    pub fn truncate(&mut self, tol: f64) {
        if tol > 0.0 {
            for col in &mut self.columns {
                col.retain(|&(_, v)| v.abs() >= tol);
            }
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(
            self.num_dofs,
            self.columns.len(),
            self.columns.iter().enumerate().flat_map(|(j, col)| col.iter().map(move |&(r, v)| (r, j, v))),
        )
    }

    /// Column metadata with nonzero counts as a JSON array.
    pub fn write_metadata_json(&self, out: &mut impl Write) -> Result<()> {
        #[derive(Serialize)]
        struct Record<'a> {
            column: usize,
            #[serde(flatten)]
            info: &'a ColumnInfo,
            nnz: usize,
        }
        let records: Vec<Record> = self
            .info
            .iter()
            .zip(&self.columns)
            .enumerate()
            .map(|(column, (info, col))| Record { column, info, nnz: col.len() })
            .collect();
        serde_json::to_writer_pretty(&mut *out, &records)?;
        writeln!(out)?;
        Ok(())
    }
}

/// `K₀ = Φᵀ K Φ`.
pub fn galerkin(k: &CsrMatrix, phi: &CsrMatrix) -> CsrMatrix {
    phi.transpose().mul(&k.mul(phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_mode_values() {
        assert_eq!(Mode::R1.displacement([1.0, 2.0, 0.0]), [2.0, -1.0, 0.0]);
        assert_eq!(Mode::R2.displacement([1.0, 2.0, 3.0]), [-3.0, 0.0, 1.0]);
        assert_eq!(Mode::R3.displacement([1.0, 2.0, 3.0]), [0.0, 3.0, -2.0]);
    }

    #[test]
    fn galerkin_trivial_cases() {
        let k = CsrMatrix::from_triplets(2, 2, [(0, 0, 2.0), (0, 1, -1.0), (1, 0, 3.0), (1, 1, 4.0)]);
        assert_eq!(galerkin(&k, &CsrMatrix::identity(2)).to_dense(), k.to_dense());
        let v = CsrMatrix::from_triplets(2, 1, [(0, 0, 1.0), (1, 0, 2.0)]);
        assert_eq!(galerkin(&k, &v).get(0, 0), 2.0 - 2.0 + 6.0 + 16.0);
    }

    #[test]
    fn truncation_and_cleanup() {
        let mut b = CoarseBasis {
            num_dofs: 8,
            columns: vec![vec![(0, 1.0), (3, 0.5), (4, 1e-6)], vec![(7, 1e-6)]],
            info: vec![
                ColumnInfo { field: Field::Displacement, component: 0, mode: Mode::Tx },
                ColumnInfo { field: Field::Temperature, component: 0, mode: Mode::Theta },
            ],
        };
        let original = b.clone();
        b.truncate(0.0);
        assert_eq!(b, original);
        b.remove_cross_field();
        assert_eq!(b.columns[0], vec![(0, 1.0), (4, 1e-6)]);
        b.truncate(1e-4);
        assert_eq!(b.columns[0], vec![(0, 1.0)]);
        assert!(b.columns[1].is_empty());
        assert_eq!(b.info, original.info);
    }
}
