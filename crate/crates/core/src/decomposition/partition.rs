//! Structured nonoverlapping partitions of a box mesh and their overlap.

use crate::error::{invalid, Result};
use crate::fem::Mesh;

/// Box of subdomains, each a contiguous block of elements.
#[derive(Clone, Debug)]
pub struct Partition {
    grid: [usize; 3],
    /// Elements per subdomain along each axis.
    block: [usize; 3],
    mesh_cells: [usize; 3],
    element_owner: Vec<usize>,
    /// Sorted subdomains whose closure contains the node.
    node_subdomains: Vec<Vec<usize>>,
}

pub fn partition_structured(mesh: &Mesh, grid: [usize; 3]) -> Result<Partition> {
    let cells = mesh.cells();
    let mut block = [0; 3];
    for axis in 0..3 {
        if grid[axis] == 0 || !cells[axis].is_multiple_of(grid[axis]) {
            return Err(invalid(format!(
                "{} cells along axis {axis} cannot be split into {} subdomains",
                cells[axis], grid[axis]
            )));
        }
        block[axis] = cells[axis] / grid[axis];
    }
    let sub_of = |ijk: [usize; 3]| ijk[0] / block[0] + grid[0] * (ijk[1] / block[1] + grid[1] * (ijk[2] / block[2]));
    let element_owner: Vec<usize> = (0..mesh.num_elements()).map(|e| sub_of(mesh.element_ijk(e))).collect();
    let node_subdomains = (0..mesh.num_nodes())
        .map(|n| {
            let mut s: Vec<usize> = mesh.node_elements(n).into_iter().map(|e| element_owner[e]).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    Ok(Partition { grid, block, mesh_cells: cells, element_owner, node_subdomains })
}

impl Partition {
    pub fn grid(&self) -> [usize; 3] {
        self.grid
    }

    pub fn subdomain_cells(&self) -> [usize; 3] {
        self.block
    }

    pub fn num_subdomains(&self) -> usize {
        self.grid.iter().product()
    }

    pub fn subdomain_ijk(&self, s: usize) -> [usize; 3] {
        let g = self.grid;
        [s % g[0], (s / g[0]) % g[1], s / (g[0] * g[1])]
    }

    pub fn element_owner(&self, element: usize) -> usize {
        self.element_owner[element]
    }

    pub fn node_subdomains(&self, node: usize) -> &[usize] {
        &self.node_subdomains[node]
    }

    /// Lowest-numbered subdomain containing the node; defines the
    /// nonoverlapping node ownership used by restricted Schwarz.
    pub fn node_owner(&self, node: usize) -> usize {
        self.node_subdomains[node][0]
    }

    pub fn num_nodes(&self) -> usize {
        self.node_subdomains.len()
    }

    /// Element-index box `[lo, hi)` of subdomain `s` grown by `layers`.
    pub fn element_box(&self, s: usize, layers: usize) -> ([usize; 3], [usize; 3]) {
        let ijk = self.subdomain_ijk(s);
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for a in 0..3 {
            lo[a] = (ijk[a] * self.block[a]).saturating_sub(layers);
            hi[a] = ((ijk[a] + 1) * self.block[a] + layers).min(self.mesh_cells[a]);
        }
        (lo, hi)
    }

    pub fn subdomain_elements(&self, mesh: &Mesh, s: usize) -> Vec<usize> {
        let (lo, hi) = self.element_box(s, 0);
        box_elements(mesh, lo, hi)
    }

    /// Closure node set of subdomain `s`.
    pub fn subdomain_nodes(&self, mesh: &Mesh, s: usize) -> Vec<usize> {
        let (lo, hi) = self.element_box(s, 0);
        box_nodes(mesh, lo, hi)
    }

    /// Nodes shared by at least two subdomains.
    pub fn shared_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&n| self.node_subdomains[n].len() >= 2).collect()
    }
}

fn box_elements(mesh: &Mesh, lo: [usize; 3], hi: [usize; 3]) -> Vec<usize> {
    let mut out = Vec::new();
    for k in lo[2]..hi[2] {
        for j in lo[1]..hi[1] {
            for i in lo[0]..hi[0] {
                out.push(mesh.element_index([i, j, k]));
            }
        }
    }
    out
}

fn box_nodes(mesh: &Mesh, lo: [usize; 3], hi: [usize; 3]) -> Vec<usize> {
    let mut out = Vec::new();
    for k in lo[2]..=hi[2] {
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                out.push(mesh.node_index([i, j, k]));
            }
        }
    }
    out
}

/// Overlapping subdomains after `layers` rounds of element dilation.
#[derive(Clone, Debug)]
pub struct Overlap {
    pub layers: usize,
    /// Sorted element lists per subdomain.
    pub elements: Vec<Vec<usize>>,
    /// Sorted node lists per subdomain.
    pub nodes: Vec<Vec<usize>>,
}

/// On a structured grid one round of dilation through shared nodes grows
/// the element box by one layer on every side, so `k` rounds are a box of
/// width `k` clipped to the mesh.
pub fn grow_overlap(mesh: &Mesh, partition: &Partition, layers: usize) -> Overlap {
    let mut elements = Vec::with_capacity(partition.num_subdomains());
    let mut nodes = Vec::with_capacity(partition.num_subdomains());
    for s in 0..partition.num_subdomains() {
        let (lo, hi) = partition.element_box(s, layers);
        let mut e = box_elements(mesh, lo, hi);
        let mut n = box_nodes(mesh, lo, hi);
        e.sort_unstable();
        n.sort_unstable();
        elements.push(e);
        nodes.push(n);
    }
    Overlap { layers, elements, nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_box_mesh;

    #[test]
    fn even_split() {
        let m = build_box_mesh([1.0; 3], [4, 4, 4]).unwrap();
        let p = partition_structured(&m, [2, 2, 2]).unwrap();
        assert_eq!(p.num_subdomains(), 8);
        for s in 0..8 {
            assert_eq!(p.subdomain_elements(&m, s).len(), 8);
        }
        let mut count = vec![0; 8];
        for e in 0..m.num_elements() {
            count[p.element_owner(e)] += 1;
        }
        assert_eq!(count, vec![8; 8]);
    }

    #[test]
    fn single_subdomain_has_no_shared_nodes() {
        let m = build_box_mesh([1.0; 3], [3, 2, 1]).unwrap();
        let p = partition_structured(&m, [1, 1, 1]).unwrap();
        assert!(p.shared_nodes().is_empty());
    }

    #[test]
    fn indivisible_grid_is_rejected() {
        let m = build_box_mesh([1.0; 3], [3, 3, 3]).unwrap();
        assert!(partition_structured(&m, [2, 1, 1]).is_err());
        assert!(partition_structured(&m, [0, 1, 1]).is_err());
    }

    #[test]
    fn plate_layout() {
        // 16x64x1 subdomains of 8x4x9 elements, checked on the partition only
        let m = build_box_mesh([30.0, 15.0, 1.0], [128, 256, 9]).unwrap();
        let p = partition_structured(&m, [16, 64, 1]).unwrap();
        assert_eq!(p.subdomain_cells(), [8, 4, 9]);
        assert_eq!(p.num_subdomains(), 1024);
    }

    #[test]
    fn bar_overlap_gains_one_plane() {
        let m = build_box_mesh([4.0, 1.0, 1.0], [4, 1, 1]).unwrap();
        let p = partition_structured(&m, [2, 1, 1]).unwrap();
        let k0 = grow_overlap(&m, &p, 0);
        let k1 = grow_overlap(&m, &p, 1);
        for s in 0..2 {
            assert_eq!(k0.nodes[s].len(), 12);
            assert_eq!(k1.nodes[s].len(), 16);
            assert_eq!(k1.elements[s].len(), 3);
            let mut closure = p.subdomain_nodes(&m, s);
            closure.sort_unstable();
            assert_eq!(k0.nodes[s], closure);
        }
        let saturated = grow_overlap(&m, &p, 10);
        assert!(saturated.nodes.iter().all(|n| n.len() == m.num_nodes()));
    }
}
