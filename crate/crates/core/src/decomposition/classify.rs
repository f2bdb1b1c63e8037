//! Interface classification into faces, edges and vertices.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::partition::Partition;
use crate::error::Result;
use crate::fem::{DofMap, Field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Face,
    Edge,
    Vertex,
}

/// Interface nodes sharing one exact subdomain set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterfaceClass {
    pub subdomains: Vec<usize>,
    /// Sorted node ids.
    pub nodes: Vec<usize>,
    pub kind: ClassKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub faces: usize,
    pub edges: usize,
    pub vertices: usize,
}

impl ClassCounts {
    pub fn of(classes: &[InterfaceClass]) -> Self {
        let mut c = Self::default();
        for class in classes {
            match class.kind {
                ClassKind::Face => c.faces += 1,
                ClassKind::Edge => c.edges += 1,
                ClassKind::Vertex => c.vertices += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.faces + self.edges + self.vertices
    }
}

pub fn kind_of(num_subdomains: usize, num_nodes: usize) -> ClassKind {
    if num_subdomains == 2 {
        ClassKind::Face
    } else if num_nodes == 1 {
        ClassKind::Vertex
    } else {
        ClassKind::Edge
    }
}

/// Groups nodes with at least two subdomains by their exact subdomain set.
/// The result is sorted by subdomain set and does not depend on input order.
pub fn classify_node_sets<'a>(entries: impl IntoIterator<Item = (usize, &'a [usize])>) -> Vec<InterfaceClass> {
    let mut groups: BTreeMap<&'a [usize], Vec<usize>> = BTreeMap::new();
    for (node, set) in entries {
        if set.len() >= 2 {
            groups.entry(set).or_default().push(node);
        }
    }
    groups
        .into_iter()
        .map(|(set, mut nodes)| {
            nodes.sort_unstable();
            InterfaceClass { kind: kind_of(set.len(), nodes.len()), subdomains: set.to_vec(), nodes }
        })
        .collect()
}

/// Interface classes of one field. Nodes whose `field` components are all
/// statically constrained are not part of that field's interface.
pub fn classify_interface(partition: &Partition, dofmap: &DofMap, field: Field) -> Vec<InterfaceClass> {
    classify_node_sets(
        (0..partition.num_nodes())
            .filter(|&n| !dofmap.node_fixed(n, field))
            .map(|n| (n, partition.node_subdomains(n))),
    )
}

#[derive(Serialize)]
struct ClassRecord<'a> {
    kind: ClassKind,
    subdomains: &'a [usize],
    nodes: usize,
}

/// One JSON object per line: kind, subdomain set, node count.
pub fn write_classes_jsonl(out: &mut impl Write, classes: &[InterfaceClass]) -> Result<()> {
    for c in classes {
        serde_json::to_writer(&mut *out, &ClassRecord { kind: c.kind, subdomains: &c.subdomains, nodes: c.nodes.len() })?;
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::partition_structured;
    use crate::fem::{build_box_mesh, build_dof_map, BcEntry, BoundaryConditions, Schedule, Selector};

    fn counts(cells: [usize; 3], grid: [usize; 3]) -> ClassCounts {
        let m = build_box_mesh([1.0; 3], cells).unwrap();
        let p = partition_structured(&m, grid).unwrap();
        let map = build_dof_map(&m, &BoundaryConditions::none()).unwrap();
        ClassCounts::of(&classify_interface(&p, &map, Field::Displacement))
    }

    #[test]
    fn cube_with_eight_subdomains() {
        assert_eq!(counts([4, 4, 4], [2, 2, 2]), ClassCounts { faces: 12, edges: 6, vertices: 1 });
    }

    #[test]
    fn single_cut_plane() {
        assert_eq!(counts([4, 2, 2], [2, 1, 1]), ClassCounts { faces: 1, edges: 0, vertices: 0 });
    }

    #[test]
    fn flat_grids_have_no_vertices() {
        assert_eq!(counts([8, 8, 2], [4, 4, 1]).vertices, 0);
    }

    #[test]
    fn dirichlet_nodes_leave_the_displacement_interface() {
        let m = build_box_mesh([1.0; 3], [4, 4, 4]).unwrap();
        let p = partition_structured(&m, [2, 2, 2]).unwrap();
        let nodes = |c: &[InterfaceClass]| c.iter().map(|c| c.nodes.len()).sum::<usize>();
        // partially constrained nodes stay on the interface
        let map = build_dof_map(&m, &BoundaryConditions::welding()).unwrap();
        let u = classify_interface(&p, &map, Field::Displacement);
        let t = classify_interface(&p, &map, Field::Temperature);
        assert_eq!(nodes(&u), nodes(&t));
        let clamp = BoundaryConditions {
            entries: (0..3)
                .map(|c| BcEntry { selector: Selector::Planes(vec![(1, false)]), component: c, schedule: Schedule::Zero })
                .collect(),
        };
        let map = build_dof_map(&m, &clamp).unwrap();
        let u = classify_interface(&p, &map, Field::Displacement);
        let t = classify_interface(&p, &map, Field::Temperature);
        // the cross x=1/2 or z=1/2 on the face y=0
        assert_eq!(nodes(&t) - nodes(&u), 9);
    }

    #[test]
    fn jsonl_dump() {
        let m = build_box_mesh([1.0; 3], [2, 2, 2]).unwrap();
        let p = partition_structured(&m, [2, 1, 1]).unwrap();
        let map = build_dof_map(&m, &BoundaryConditions::none()).unwrap();
        let mut buf = Vec::new();
        write_classes_jsonl(&mut buf, &classify_interface(&p, &map, Field::Temperature)).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "{\"kind\":\"face\",\"subdomains\":[0,1],\"nodes\":9}\n");
    }
}
