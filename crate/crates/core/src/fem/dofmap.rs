//! Node-interleaved DOF numbering and static Dirichlet bookkeeping.

use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use crate::error::{invalid, Result};

pub const DOFS_PER_NODE: usize = 4;
/// Local index of the temperature DOF within a node block.
pub const THETA: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Displacement,
    Temperature,
}

impl Field {
    pub fn of_component(comp: usize) -> Field {
        if comp == THETA {
            Field::Temperature
        } else {
            Field::Displacement
        }
    }

    pub fn components(self) -> std::ops::Range<usize> {
        match self {
            Field::Displacement => 0..3,
            Field::Temperature => 3..4,
        }
    }
}

/// Identifies how a constrained value evolves in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Zero,
    /// The loading displacement `u_D(t)`.
    Load,
    /// Melting-pool temperature, assigned per step.
    Laser,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub node: usize,
    /// 0..3 displacement axis or `THETA`.
    pub component: usize,
    pub schedule: Schedule,
}

/// Node set addressed by a boundary condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    /// Intersection of boundary planes, each `(axis, at_max)`.
    Planes(Vec<(usize, bool)>),
    Nodes(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BcEntry {
    pub selector: Selector,
    pub component: usize,
    pub schedule: Schedule,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConditions {
    pub entries: Vec<BcEntry>,
}

impl BoundaryConditions {
    pub fn none() -> Self {
        Self::default()
    }

    /// Clamping of the welding plate: `u_y = 0` on `y = 0`, `u_x = 0` on the
    /// line `y = 0 ∧ x = 0`, `u_z = 0` on the line `y = 0 ∧ z = 0`, and the
    /// load schedule on `u_y` at `y = l_y`.
    pub fn welding() -> Self {
        let planes = |p: &[(usize, bool)]| Selector::Planes(p.to_vec());
        Self {
            entries: vec![
                BcEntry { selector: planes(&[(1, false)]), component: 1, schedule: Schedule::Zero },
                BcEntry { selector: planes(&[(1, false), (0, false)]), component: 0, schedule: Schedule::Zero },
                BcEntry { selector: planes(&[(1, false), (2, false)]), component: 2, schedule: Schedule::Zero },
                BcEntry { selector: planes(&[(1, true)]), component: 1, schedule: Schedule::Load },
            ],
        }
    }
}

#[derive(Clone, Debug)]
pub struct DofMap {
    num_nodes: usize,
    constraints: Vec<Constraint>,
    /// Schedule per DOF, `None` when free.
    by_dof: Vec<Option<Schedule>>,
}

#[inline]
pub fn dof(node: usize, component: usize) -> usize {
    DOFS_PER_NODE * node + component
}

pub fn build_dof_map(mesh: &Mesh, bc: &BoundaryConditions) -> Result<DofMap> {
    let num_nodes = mesh.num_nodes();
    let mut by_dof = vec![None; DOFS_PER_NODE * num_nodes];
    let mut constraints = Vec::new();
    for entry in &bc.entries {
        if entry.component >= DOFS_PER_NODE {
            return Err(invalid(format!("component {} out of range", entry.component)));
        }
        let nodes: Vec<usize> = match &entry.selector {
            Selector::Planes(planes) => {
                if planes.iter().any(|&(axis, _)| axis >= 3) {
                    return Err(invalid("boundary plane axis out of range"));
                }
                (0..num_nodes)
                    .filter(|&n| planes.iter().all(|&(axis, max)| mesh.on_plane(n, axis, max)))
                    .collect()
            }
            Selector::Nodes(list) => {
                for &n in list {
                    if n >= num_nodes {
                        return Err(invalid(format!("constraint on non-existent node {n}")));
                    }
                    if !mesh.is_boundary_node(n) {
                        return Err(invalid(format!("constraint on interior node {n}")));
                    }
                }
                list.clone()
            }
        };
        for node in nodes {
            let d = dof(node, entry.component);
            match by_dof[d] {
                // the same schedule reached through two selectors is idempotent
                Some(s) if s == entry.schedule => continue,
                Some(_) => {
                    return Err(invalid(format!(
                        "node {node} component {} constrained by conflicting schedules",
                        entry.component
                    )))
                }
                None => {}
            }
            by_dof[d] = Some(entry.schedule);
            constraints.push(Constraint { node, component: entry.component, schedule: entry.schedule });
        }
    }
    Ok(DofMap { num_nodes, constraints, by_dof })
}

impl DofMap {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_dofs(&self) -> usize {
        DOFS_PER_NODE * self.num_nodes
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn schedule(&self, dof: usize) -> Option<Schedule> {
        self.by_dof[dof]
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.by_dof[dof].is_some()
    }

    /// True when every component of `field` at `node` is statically fixed.
    pub fn node_fixed(&self, node: usize, field: Field) -> bool {
        field.components().all(|c| self.is_constrained(dof(node, c)))
    }

    pub fn num_free(&self) -> usize {
        self.by_dof.iter().filter(|s| s.is_none()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::build_box_mesh;

    fn cube4() -> Mesh {
        build_box_mesh([1.0; 3], [4, 4, 4]).unwrap()
    }

    #[test]
    fn welding_pattern_counts() {
        let m = cube4();
        let map = build_dof_map(&m, &BoundaryConditions::welding()).unwrap();
        let count = |comp: usize, s: Schedule| {
            map.constraints().iter().filter(|c| c.component == comp && c.schedule == s).count()
        };
        assert_eq!(count(1, Schedule::Zero), 25);
        assert_eq!(count(1, Schedule::Load), 25);
        assert_eq!(count(0, Schedule::Zero), 5);
        assert_eq!(count(2, Schedule::Zero), 5);
        for c in map.constraints().iter().filter(|c| c.schedule == Schedule::Load) {
            assert!(m.on_plane(c.node, 1, true));
        }
    }

    #[test]
    fn empty_conditions_leave_everything_free() {
        let map = build_dof_map(&cube4(), &BoundaryConditions::none()).unwrap();
        assert_eq!(map.num_dofs(), 500);
        assert_eq!(map.num_free(), 500);
    }

    #[test]
    fn dof_indices_are_a_bijection() {
        let mut seen = vec![false; 500];
        for n in 0..125 {
            for c in 0..DOFS_PER_NODE {
                assert!(!std::mem::replace(&mut seen[dof(n, c)], true));
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn unknown_node_is_rejected() {
        let bc = BoundaryConditions {
            entries: vec![BcEntry { selector: Selector::Nodes(vec![999]), component: 0, schedule: Schedule::Zero }],
        };
        assert!(build_dof_map(&cube4(), &bc).is_err());
    }

    #[test]
    fn conflicting_schedules_are_rejected() {
        let planes = Selector::Planes(vec![(1, false)]);
        let bc = BoundaryConditions {
            entries: vec![
                BcEntry { selector: planes.clone(), component: 1, schedule: Schedule::Zero },
                BcEntry { selector: planes, component: 1, schedule: Schedule::Load },
            ],
        };
        assert!(build_dof_map(&cube4(), &bc).is_err());
    }
}
