//! Global assembly over a fixed node-block sparsity pattern.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::element::{bbar_strain_operator, element_blocks, ElementInput, ElementShape, ElementVector};
use crate::error::{invalid, Result};
use crate::fem::{dof, Field, Mesh, QuadratureRule, DOFS_PER_NODE};
use crate::linalg::CsrMatrix;
use crate::materials::MaterialTable;

static NEXT_STAMP: AtomicU64 = AtomicU64::new(1);

/// Unique identity of one assembled operator.
pub fn fresh_stamp() -> u64 {
    NEXT_STAMP.fetch_add(1, Ordering::Relaxed)
}

/// Target values of Dirichlet DOFs for one Newton solve.
pub type DirichletValues = BTreeMap<usize, f64>;

/// Monolithic operator with a field tag per DOF.
#[derive(Clone, Debug)]
pub struct BlockMatrix {
    pub matrix: CsrMatrix,
    pub fields: Vec<Field>,
    pub stamp: u64,
}

impl BlockMatrix {
    pub fn new(matrix: CsrMatrix) -> Self {
        assert_eq!(matrix.nrows() % DOFS_PER_NODE, 0);
        let fields = (0..matrix.nrows()).map(|d| Field::of_component(d % DOFS_PER_NODE)).collect();
        Self { matrix, fields, stamp: fresh_stamp() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Field-restricted block, e.g. `K_uθ`, in increasing DOF order.
    pub fn field_block(&self, rows: Field, cols: Field) -> CsrMatrix {
        let pick = |f: Field| (0..self.dim()).filter(|&d| self.fields[d] == f).collect::<Vec<_>>();
        self.matrix.submatrix(&pick(rows), &pick(cols))
    }
}

/// Monolithic nodal state `d = (u_x,u_y,u_z,θ)` per node.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub d: Vec<f64>,
    pub d_prev: Vec<f64>,
    pub t: f64,
    pub dt: f64,
}

impl State {
    /// Zero displacement and uniform temperature.
    pub fn initial(num_nodes: usize, theta0: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        let mut d = vec![0.0; DOFS_PER_NODE * num_nodes];
        for n in 0..num_nodes {
            d[dof(n, 3)] = theta0;
        }
        Ok(Self { d_prev: d.clone(), d, t: 0.0, dt })
    }

    pub fn theta(&self, node: usize) -> f64 {
        self.d[dof(node, 3)]
    }

    pub fn theta_prev(&self, node: usize) -> f64 {
        self.d_prev[dof(node, 3)]
    }

    pub fn displacement(&self, node: usize) -> [f64; 3] {
        [self.d[dof(node, 0)], self.d[dof(node, 1)], self.d[dof(node, 2)]]
    }

    /// Accepts the current iterate as the new previous step.
    pub fn commit(&mut self) {
        self.d_prev.copy_from_slice(&self.d);
    }

    fn element_vectors(&self, nodes: &[usize; 8]) -> (ElementVector, ElementVector) {
        let mut cur = [0.0; 32];
        let mut prev = [0.0; 32];
        for (a, &n) in nodes.iter().enumerate() {
            for c in 0..DOFS_PER_NODE {
                cur[DOFS_PER_NODE * a + c] = self.d[dof(n, c)];
                prev[DOFS_PER_NODE * a + c] = self.d_prev[dof(n, c)];
            }
        }
        (cur, prev)
    }
}

/// Assembles tangent and residual for one mesh. The node-block pattern and
/// the element shape data are set up once; every element of a uniform box
/// mesh shares the same geometry up to translation.
#[derive(Clone, Debug)]
pub struct Assembler {
    mesh: Mesh,
    materials: MaterialTable,
    theta_ref: f64,
    shape: ElementShape,
    /// Sorted neighbour nodes per node.
    neighbours: Vec<Vec<usize>>,
    pattern: CsrMatrix,
}

/// Elements handled per parallel batch; bounds the buffered element matrices.
const BATCH: usize = 512;

impl Assembler {
    pub fn new(mesh: &Mesh, materials: &MaterialTable, theta_ref: f64) -> Result<Self> {
        materials.validate()?;
        let shape = bbar_strain_operator(&QuadratureRule::gauss_2x2x2(), &mesh.element_geometry(0), 0)?;
        let nn = mesh.num_nodes();
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); nn];
        for (n, list) in neighbours.iter_mut().enumerate() {
            for e in mesh.node_elements(n) {
                list.extend_from_slice(&mesh.element_nodes(e));
            }
            list.sort_unstable();
            list.dedup();
        }
        let mut row_ptr = Vec::with_capacity(DOFS_PER_NODE * nn + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for list in &neighbours {
            for _ in 0..DOFS_PER_NODE {
                for &m in list {
                    col_idx.extend((0..DOFS_PER_NODE).map(|c| dof(m, c)));
                }
                row_ptr.push(col_idx.len());
            }
        }
        let n = DOFS_PER_NODE * nn;
        let pattern = CsrMatrix::from_pattern(n, n, row_ptr, col_idx);
        Ok(Self { mesh: mesh.clone(), materials: materials.clone(), theta_ref, shape, neighbours, pattern })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn materials(&self) -> &MaterialTable {
        &self.materials
    }

    pub fn theta_ref(&self) -> f64 {
        self.theta_ref
    }

    pub fn element_shape(&self) -> &ElementShape {
        &self.shape
    }

    /// Position of entry `(dof(n, c), dof(m, c'))` given `k` = index of `m`
    /// in the neighbour list of `n`.
    #[inline]
    fn slot(&self, n: usize, c: usize, k: usize, c2: usize) -> usize {
        self.pattern.row_ptr()[dof(n, c)] + DOFS_PER_NODE * k + c2
    }

    /// Tangent `∂r/∂d` and residual `r` without boundary conditions.
    pub fn assemble_raw(&self, state: &State) -> Result<(CsrMatrix, Vec<f64>)> {
        let ndofs = self.pattern.nrows();
        if state.d.len() != ndofs || state.d_prev.len() != ndofs {
            return Err(invalid(format!("state has {} DOFs, mesh has {ndofs}", state.d.len())));
        }
        if !(state.dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {}", state.dt)));
        }
        let mut k = self.pattern.clone();
        let mut r = vec![0.0; ndofs];
        let ne = self.mesh.num_elements();
        for start in (0..ne).step_by(BATCH) {
            let end = (start + BATCH).min(ne);
            let blocks: Vec<_> = (start..end)
                .into_par_iter()
                .map(|e| {
                    let nodes = self.mesh.element_nodes(e);
                    let (cur, prev) = state.element_vectors(&nodes);
                    let input = ElementInput { current: &cur, previous: &prev, dt: state.dt, theta_ref: self.theta_ref };
                    element_blocks(&self.shape, input, &self.materials).map(|b| (nodes, b.interleaved()))
                })
                .collect::<Result<_>>()?;
            for (nodes, (ke, re)) in blocks {
                let values = k.values_mut();
                for (a, &n) in nodes.iter().enumerate() {
                    let list = &self.neighbours[n];
                    for c in 0..DOFS_PER_NODE {
                        r[dof(n, c)] += re[DOFS_PER_NODE * a + c];
                    }
                    for (b, &m) in nodes.iter().enumerate() {
                        let kidx = list.binary_search(&m).expect("element nodes are neighbours");
                        for c in 0..DOFS_PER_NODE {
                            for c2 in 0..DOFS_PER_NODE {
                                values[self.slot(n, c, kidx, c2)] += ke[(DOFS_PER_NODE * a + c, DOFS_PER_NODE * b + c2)];
                            }
                        }
                    }
                }
            }
        }
        Ok((k, r))
    }

    /// Newton system `K Δd = R` with `R = −r` and Dirichlet DOFs eliminated
    /// symmetrically; constrained entries of `Δd` equal target − current.
    pub fn assemble(&self, state: &State, dirichlet: &DirichletValues) -> Result<(BlockMatrix, Vec<f64>)> {
        let (mut k, r) = self.assemble_raw(state)?;
        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        apply_dirichlet(&mut k, &mut rhs, state, dirichlet)?;
        Ok((BlockMatrix::new(k), rhs))
    }
}

/// Symmetric elimination keeping the pattern: constrained rows and columns
/// become explicit zeros with a unit diagonal.
pub fn apply_dirichlet(k: &mut CsrMatrix, rhs: &mut [f64], state: &State, dirichlet: &DirichletValues) -> Result<()> {
    let n = k.nrows();
    let mut increment = vec![None; n];
    for (&d, &target) in dirichlet {
        if d >= n {
            return Err(invalid(format!("Dirichlet DOF {d} out of range")));
        }
        increment[d] = Some(target - state.d[d]);
    }
    let row_ptr = k.row_ptr().to_vec();
    let col_idx = k.col_idx().to_vec();
    let values = k.values_mut();
    for row in 0..n {
        let range = row_ptr[row]..row_ptr[row + 1];
        if let Some(g) = increment[row] {
            for p in range {
                values[p] = if col_idx[p] == row { 1.0 } else { 0.0 };
            }
            rhs[row] = g;
        } else {
            for p in range {
                if let Some(g) = increment[col_idx[p]] {
                    rhs[row] -= values[p] * g;
                    values[p] = 0.0;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_box_mesh;

    fn table() -> MaterialTable {
        MaterialTable::constant(2.0e5, 0.3, 1.2e-5, 20.0, 5.0e5, 8.0e-9)
    }

    #[test]
    fn single_element_equals_element_matrix() {
        let mesh = build_box_mesh([1.0; 3], [1, 1, 1]).unwrap();
        let asm = Assembler::new(&mesh, &table(), 20.0).unwrap();
        let mut state = State::initial(8, 20.0, 1e-3).unwrap();
        for (i, v) in state.d.iter_mut().enumerate() {
            *v += 1e-3 * (i as f64).sin();
        }
        let (k, r) = asm.assemble_raw(&state).unwrap();
        let (cur, prev) = state.element_vectors(&mesh.element_nodes(0));
        let input = ElementInput { current: &cur, previous: &prev, dt: 1e-3, theta_ref: 20.0 };
        let (ke, re) = element_blocks(asm.element_shape(), input, &table()).unwrap().interleaved();
        assert_eq!(k.to_dense(), ke);
        assert_eq!(r, re.as_slice().to_vec());
    }

    #[test]
    fn fully_constrained_gives_identity() {
        let mesh = build_box_mesh([1.0; 3], [1, 1, 1]).unwrap();
        let asm = Assembler::new(&mesh, &table(), 20.0).unwrap();
        let state = State::initial(8, 20.0, 1e-3).unwrap();
        let dirichlet: DirichletValues = (0..32).map(|d| (d, d as f64)).collect();
        let (k, rhs) = asm.assemble(&state, &dirichlet).unwrap();
        assert_eq!(k.matrix.to_dense(), nalgebra::DMatrix::identity(32, 32));
        for d in 0..32 {
            assert_eq!(rhs[d], d as f64 - state.d[d]);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mesh = build_box_mesh([1.0; 3], [1, 1, 1]).unwrap();
        let asm = Assembler::new(&mesh, &table(), 20.0).unwrap();
        let state = State::initial(9, 20.0, 1e-3).unwrap();
        assert!(asm.assemble_raw(&state).is_err());
    }

    #[test]
    fn elimination_preserves_solution() {
        let mesh = build_box_mesh([2.0, 1.0, 1.0], [2, 1, 1]).unwrap();
        let asm = Assembler::new(&mesh, &table(), 20.0).unwrap();
        let state = State::initial(mesh.num_nodes(), 20.0, 1e-3).unwrap();
        let (raw, r) = asm.assemble_raw(&state).unwrap();
        let mut dirichlet = DirichletValues::new();
        for n in 0..mesh.num_nodes() {
            if mesh.on_plane(n, 0, false) {
                for c in 0..4 {
                    dirichlet.insert(dof(n, c), state.d[dof(n, c)] + 0.01 * c as f64);
                }
            }
        }
        let (k, rhs) = asm.assemble(&state, &dirichlet).unwrap();
        let x = crate::linalg::SparseLu::factor(&k.matrix, "k").unwrap().solve(&rhs);
        // the unreduced equations hold on free rows
        let kx = raw.mul_vec(&x);
        for row in 0..k.dim() {
            if dirichlet.contains_key(&row) {
                assert!((x[row] - 0.01 * (row % 4) as f64).abs() < 1e-14);
            } else {
                assert!((kx[row] + r[row]).abs() < 1e-8 * (1.0 + r[row].abs()));
            }
        }
    }
}
