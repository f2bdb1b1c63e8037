//! Interface components of the GDSW family behind a named strategy registry.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::classify::{ClassCounts, ClassKind, InterfaceClass};
use crate::error::{invalid, Result};
use crate::fem::Mesh;

/// Weighted node set supporting one group of coarse basis functions.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    /// Index of the class the component is rooted at.
    pub root: usize,
    /// `(node, weight)` sorted by node.
    pub nodes: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct ComponentSet {
    /// Registry name of the strategy that built the set.
    pub variant: &'static str,
    pub components: Vec<Component>,
    pub counts: ClassCounts,
}

/// Data a strategy may consult beyond the classes themselves.
#[derive(Clone, Copy)]
pub struct ComponentContext<'a> {
    pub mesh: &'a Mesh,
}

pub trait ComponentStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn build(&self, classes: &[InterfaceClass], ctx: ComponentContext<'_>) -> Vec<Component>;
}

/// `a ⊊ b` for sorted sets.
fn proper_subset(a: &[usize], b: &[usize]) -> bool {
    a.len() < b.len() && a.iter().all(|x| b.binary_search(x).is_ok())
}

fn whole(root: usize, class: &InterfaceClass) -> Component {
    Component { root, nodes: class.nodes.iter().map(|&n| (n, 1.0)).collect() }
}

/// Assembles components from `roots` and, for every other class, the list of
/// roots it is shared among. Classes with an empty list stand alone.
fn distribute(classes: &[InterfaceClass], roots: &[usize], shares: &[Vec<usize>]) -> Vec<Component> {
    let mut slot = vec![usize::MAX; classes.len()];
    let mut out: Vec<Component> = Vec::new();
    for &r in roots {
        slot[r] = out.len();
        out.push(whole(r, &classes[r]));
    }
    for (c, owners) in shares.iter().enumerate() {
        if slot[c] != usize::MAX {
            continue;
        }
        if owners.is_empty() {
            out.push(whole(c, &classes[c]));
            continue;
        }
        let w = 1.0 / owners.len() as f64;
        for &r in owners {
            out[slot[r]].nodes.extend(classes[c].nodes.iter().map(|&n| (n, w)));
        }
    }
    for comp in &mut out {
        comp.nodes.sort_by_key(|&(n, _)| n);
    }
    out
}

/// One component per class.
pub struct Gdsw;

impl ComponentStrategy for Gdsw {
    fn name(&self) -> &'static str {
        "GDSW"
    }

    fn build(&self, classes: &[InterfaceClass], _ctx: ComponentContext<'_>) -> Vec<Component> {
        classes.iter().enumerate().map(|(i, c)| whole(i, c)).collect()
    }
}

/// Vertices absorb their adjacent edges; faces stay separate.
pub struct GdswStar;

impl GdswStar {
    /// The edge touches the vertex node through a mesh neighbour.
    fn incident(mesh: &Mesh, edge: &InterfaceClass, vertex: &InterfaceClass) -> bool {
        let v = mesh.node_ijk(vertex.nodes[0]);
        edge.nodes.iter().any(|&n| {
            let e = mesh.node_ijk(n);
            (0..3).all(|a| e[a].abs_diff(v[a]) <= 1)
        })
    }
}

impl ComponentStrategy for GdswStar {
    fn name(&self) -> &'static str {
        "GDSW*"
    }

    fn build(&self, classes: &[InterfaceClass], ctx: ComponentContext<'_>) -> Vec<Component> {
        let vertices: Vec<usize> = (0..classes.len()).filter(|&i| classes[i].kind == ClassKind::Vertex).collect();
        let shares: Vec<Vec<usize>> = classes
            .iter()
            .map(|c| match c.kind {
                ClassKind::Edge => vertices
                    .iter()
                    .copied()
                    .filter(|&v| {
                        proper_subset(&c.subdomains, &classes[v].subdomains) && Self::incident(ctx.mesh, c, &classes[v])
                    })
                    .collect(),
                _ => Vec::new(),
            })
            .collect();
        distribute(classes, &vertices, &shares)
    }
}

/// Locally maximal classes are roots; every other class is shared among the
/// roots whose subdomain set contains it.
pub struct Rgdsw;

impl ComponentStrategy for Rgdsw {
    fn name(&self) -> &'static str {
        "RGDSW"
    }

    fn build(&self, classes: &[InterfaceClass], _ctx: ComponentContext<'_>) -> Vec<Component> {
        // index classes by subdomain so that superset queries only visit
        // classes sharing the first subdomain
        let mut by_subdomain: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, c) in classes.iter().enumerate() {
            for &s in &c.subdomains {
                by_subdomain.entry(s).or_default().push(i);
            }
        }
        let supersets = |i: usize| -> Vec<usize> {
            let c = &classes[i];
            by_subdomain[&c.subdomains[0]]
                .iter()
                .copied()
                .filter(|&j| proper_subset(&c.subdomains, &classes[j].subdomains))
                .collect()
        };
        let over: Vec<Vec<usize>> = (0..classes.len()).map(supersets).collect();
        let roots: Vec<usize> = (0..classes.len()).filter(|&i| over[i].is_empty()).collect();
        let shares: Vec<Vec<usize>> = over
            .into_iter()
            .map(|sup| sup.into_iter().filter(|j| roots.binary_search(j).is_ok()).collect())
            .collect();
        distribute(classes, &roots, &shares)
    }
}

pub struct StrategyRegistry {
    strategies: BTreeMap<String, Arc<dyn ComponentStrategy>>,
}

fn key(name: &str) -> String {
    name.trim().to_ascii_lowercase()
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self { strategies: BTreeMap::new() }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Gdsw), &[]);
        r.register(Arc::new(GdswStar), &["gdsw_star", "gdswstar"]);
        r.register(Arc::new(Rgdsw), &[]);
        r
    }

    /// Registers under the strategy's own name and any aliases, all matched
    /// case-insensitively. Later registrations replace earlier ones.
    pub fn register(&mut self, strategy: Arc<dyn ComponentStrategy>, aliases: &[&str]) {
        for name in std::iter::once(strategy.name()).chain(aliases.iter().copied()) {
            self.strategies.insert(key(name), strategy.clone());
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ComponentStrategy>> {
        self.strategies.get(&key(name)).cloned().ok_or_else(|| {
            invalid(format!("unknown coarse space variant `{name}`; known: {}", self.names().join(", ")))
        })
    }

    /// Canonical names of the registered strategies.
    pub fn names(&self) -> Vec<&'static str> {
        let mut names: Vec<&'static str> = self.strategies.values().map(|s| s.name()).collect();
        names.sort_unstable();
        names.dedup();
        names
    }
}

pub fn build_components(
    classes: &[InterfaceClass],
    strategy: &dyn ComponentStrategy,
    ctx: ComponentContext<'_>,
) -> ComponentSet {
    ComponentSet { variant: strategy.name(), components: strategy.build(classes, ctx), counts: ClassCounts::of(classes) }
}

impl ComponentSet {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Sum of component weights per node.
    pub fn weight_sums(&self, num_nodes: usize) -> Vec<f64> {
        let mut s = vec![0.0; num_nodes];
        for c in &self.components {
            for &(n, w) in &c.nodes {
                s[n] += w;
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{classify_interface, partition_structured};
    use crate::fem::{build_box_mesh, build_dof_map, BoundaryConditions, Field};

    fn setup(cells: [usize; 3], grid: [usize; 3]) -> (Mesh, Vec<InterfaceClass>) {
        let m = build_box_mesh([1.0; 3], cells).unwrap();
        let p = partition_structured(&m, grid).unwrap();
        let map = build_dof_map(&m, &BoundaryConditions::none()).unwrap();
        let classes = classify_interface(&p, &map, Field::Displacement);
        (m, classes)
    }

    fn build(name: &str, m: &Mesh, classes: &[InterfaceClass]) -> ComponentSet {
        let reg = StrategyRegistry::with_defaults();
        build_components(classes, reg.get(name).unwrap().as_ref(), ComponentContext { mesh: m })
    }

    #[test]
    fn component_counts_on_eight_subdomains() {
        let (m, classes) = setup([4, 4, 4], [2, 2, 2]);
        assert_eq!(build("GDSW", &m, &classes).len(), 19);
        assert_eq!(build("gdsw*", &m, &classes).len(), 13);
        assert_eq!(build("RGDSW", &m, &classes).len(), 1);
    }

    #[test]
    fn weights_partition_unity() {
        let (m, classes) = setup([6, 6, 6], [3, 3, 3]);
        let on_interface: Vec<usize> = classes.iter().flat_map(|c| c.nodes.iter().copied()).collect();
        for name in ["GDSW", "GDSW*", "RGDSW"] {
            let set = build(name, &m, &classes);
            let sums = set.weight_sums(m.num_nodes());
            for &n in &on_interface {
                assert!((sums[n] - 1.0).abs() < 1e-15, "{name} node {n}: {}", sums[n]);
            }
            assert_eq!(sums.iter().filter(|&&s| s != 0.0).count(), on_interface.len());
        }
    }

    #[test]
    fn flat_grid_variants_coincide() {
        let (m, classes) = setup([8, 8, 2], [4, 4, 1]);
        assert_eq!(build("GDSW", &m, &classes).components, build("GDSW*", &m, &classes).components);
    }

    #[test]
    fn shared_edge_is_halved() {
        // inner edges of a 3x3x3 grid run between two vertices; with two
        // elements per subdomain they would be single nodes, i.e. vertices
        let (m, classes) = setup([9, 9, 9], [3, 3, 3]);
        let set = build("GDSW*", &m, &classes);
        let halves = set.components.iter().flat_map(|c| c.nodes.iter()).filter(|(_, w)| *w == 0.5).count();
        assert!(halves > 0);
    }

    #[test]
    fn registry_lookup() {
        let reg = StrategyRegistry::with_defaults();
        assert_eq!(reg.get("gdsw_star").unwrap().name(), "GDSW*");
        assert_eq!(reg.names(), vec!["GDSW", "GDSW*", "RGDSW"]);
        assert!(reg.get("BDDC").is_err());
    }
}
