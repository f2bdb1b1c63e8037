//! Structured hexahedral meshes of box domains.

use crate::error::{invalid, Result};

/// Physical coordinates of the 8 element nodes, local node `a` sitting at
/// reference corner `(a & 1, (a >> 1) & 1, (a >> 2) & 1)`.
pub type ElementGeometry = [[f64; 3]; 8];

/// Uniform box mesh `[0,lx]×[0,ly]×[0,lz]` with lexicographic node ordering
/// (x fastest, then y, then z). Lengths are in mm.
#[derive(Clone, Debug)]
pub struct Mesh {
    extent: [f64; 3],
    cells: [usize; 3],
    coords: Vec<[f64; 3]>,
}

pub fn build_box_mesh(extent: [f64; 3], cells: [usize; 3]) -> Result<Mesh> {
    for axis in 0..3 {
        if !(extent[axis] > 0.0) || !extent[axis].is_finite() {
            return Err(invalid(format!("extent along axis {axis} must be positive, got {}", extent[axis])));
        }
        if cells[axis] == 0 {
            return Err(invalid(format!("cell count along axis {axis} must be at least 1")));
        }
    }
    let h = [
        extent[0] / cells[0] as f64,
        extent[1] / cells[1] as f64,
        extent[2] / cells[2] as f64,
    ];
    let mut coords = Vec::with_capacity((cells[0] + 1) * (cells[1] + 1) * (cells[2] + 1));
    for k in 0..=cells[2] {
        for j in 0..=cells[1] {
            for i in 0..=cells[0] {
                coords.push([i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]]);
            }
        }
    }
    Ok(Mesh { extent, cells, coords })
}

impl Mesh {
    pub fn extent(&self) -> [f64; 3] {
        self.extent
    }

    pub fn cells(&self) -> [usize; 3] {
        self.cells
    }

    /// Nodes per axis.
    pub fn nodes_per_axis(&self) -> [usize; 3] {
        [self.cells[0] + 1, self.cells[1] + 1, self.cells[2] + 1]
    }

    pub fn spacing(&self) -> [f64; 3] {
        [
            self.extent[0] / self.cells[0] as f64,
            self.extent[1] / self.cells[1] as f64,
            self.extent[2] / self.cells[2] as f64,
        ]
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_elements(&self) -> usize {
        self.cells[0] * self.cells[1] * self.cells[2]
    }

    pub fn centroid(&self) -> [f64; 3] {
        [self.extent[0] / 2.0, self.extent[1] / 2.0, self.extent[2] / 2.0]
    }

    #[inline]
    pub fn node_index(&self, ijk: [usize; 3]) -> usize {
        let n = self.nodes_per_axis();
        ijk[0] + n[0] * (ijk[1] + n[1] * ijk[2])
    }

    #[inline]
    pub fn node_ijk(&self, node: usize) -> [usize; 3] {
        let n = self.nodes_per_axis();
        [node % n[0], (node / n[0]) % n[1], node / (n[0] * n[1])]
    }

    #[inline]
    pub fn element_index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.cells[0] * (ijk[1] + self.cells[1] * ijk[2])
    }

    #[inline]
    pub fn element_ijk(&self, element: usize) -> [usize; 3] {
        let c = self.cells;
        [element % c[0], (element / c[0]) % c[1], element / (c[0] * c[1])]
    }

    #[inline]
    pub fn coord(&self, node: usize) -> [f64; 3] {
        self.coords[node]
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    pub fn element_nodes(&self, element: usize) -> [usize; 8] {
        let [i, j, k] = self.element_ijk(element);
        let mut nodes = [0; 8];
        for (a, node) in nodes.iter_mut().enumerate() {
            *node = self.node_index([i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1)]);
        }
        nodes
    }

    pub fn element_geometry(&self, element: usize) -> ElementGeometry {
        self.element_nodes(element).map(|n| self.coords[n])
    }

    /// Elements containing `node`.
    pub fn node_elements(&self, node: usize) -> Vec<usize> {
        let ijk = self.node_ijk(node);
        let mut out = Vec::with_capacity(8);
        for dk in 0..2 {
            for dj in 0..2 {
                for di in 0..2 {
                    let e = [ijk[0] as isize - di, ijk[1] as isize - dj, ijk[2] as isize - dk];
                    if (0..3).all(|a| e[a] >= 0 && (e[a] as usize) < self.cells[a]) {
                        out.push(self.element_index([e[0] as usize, e[1] as usize, e[2] as usize]));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// True if the node lies on the boundary plane `axis = 0` (`max = false`)
    /// or `axis = l_axis` (`max = true`).
    pub fn on_plane(&self, node: usize, axis: usize, max: bool) -> bool {
        let idx = self.node_ijk(node)[axis];
        if max {
            idx == self.cells[axis]
        } else {
            idx == 0
        }
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        (0..3).any(|a| self.on_plane(node, a, false) || self.on_plane(node, a, true))
    }
}
