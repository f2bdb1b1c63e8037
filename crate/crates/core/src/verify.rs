//! Reference computations and the self-check suite behind `lbw-dd verify`.
//!
//! The references take the direct route wherever the library takes a fast
//! one: subdomain sets from box geometry instead of element adjacency,
//! dense inverses instead of sparse factorizations, finite differences
//! instead of the analytic tangent.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::assembly::{Assembler, BlockMatrix, State};
use crate::coarse::{extension_residuals, interface_values, CoarseBasis, CoarseConfig, DofRoles, Mode};
use crate::decomposition::{ClassCounts, StrategyRegistry};
use crate::driver::{Scenario, Simulation};
use crate::error::Result;
use crate::fem::{build_box_mesh, dof, Field, Mesh, DOFS_PER_NODE, THETA};
use crate::krylov::{gmres, GmresOptions};
use crate::linalg::CsrMatrix;
use crate::materials::MaterialTable;
use crate::schwarz::{FirstLevel, SchwarzOptions, SchwarzPreconditioner, SchwarzSetup};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Interface classes and component counts from box geometry alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceCounts {
    pub classes: ClassCounts,
    pub gdsw: usize,
    pub gdsw_star: usize,
    pub rgdsw: usize,
}

/// Subdomain indices along one axis whose closed interval holds grid
/// coordinate `i`.
fn axis_owners(i: usize, block: usize, grid: usize) -> Vec<usize> {
    if i.is_multiple_of(block) && i > 0 && i < block * grid {
        vec![i / block - 1, i / block]
    } else {
        vec![(i / block).min(grid - 1)]
    }
}

/// Enumerates node subdomain sets of a structured partition. Nodes for
/// which `excluded` holds are skipped.
pub fn brute_force_counts(mesh: &Mesh, grid: [usize; 3], excluded: impl Fn(usize) -> bool) -> BruteForceCounts {
    let cells = mesh.cells();
    let block = [cells[0] / grid[0], cells[1] / grid[1], cells[2] / grid[2]];
    let mut sets: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for n in 0..mesh.num_nodes() {
        if excluded(n) {
            continue;
        }
        let ijk = mesh.node_ijk(n);
        let per_axis: Vec<Vec<usize>> = (0..3).map(|a| axis_owners(ijk[a], block[a], grid[a])).collect();
        let mut set = Vec::new();
        for &k in &per_axis[2] {
            for &j in &per_axis[1] {
                for &i in &per_axis[0] {
                    set.push(i + grid[0] * (j + grid[1] * k));
                }
            }
        }
        if set.len() >= 2 {
            set.sort_unstable();
            sets.entry(set).or_default().push(n);
        }
    }
    let list: Vec<(Vec<usize>, Vec<usize>)> = sets.into_iter().collect();
    let mut classes = ClassCounts::default();
    for (set, nodes) in &list {
        match (set.len(), nodes.len()) {
            (2, _) => classes.faces += 1,
            (_, 1) => classes.vertices += 1,
            _ => classes.edges += 1,
        }
    }
    let contains = |big: &[usize], small: &[usize]| big.len() > small.len() && small.iter().all(|x| big.contains(x));
    let near = |a: usize, b: usize| {
        let (p, q) = (mesh.node_ijk(a), mesh.node_ijk(b));
        (0..3).all(|d| p[d].abs_diff(q[d]) <= 1)
    };
    let absorbed_edges = list
        .iter()
        .filter(|(e, en)| e.len() > 2 && en.len() > 1)
        .filter(|(e, en)| {
            list.iter().any(|(v, vn)| {
                v.len() > 2 && vn.len() == 1 && contains(v, e) && en.iter().any(|&n| near(n, vn[0]))
            })
        })
        .count();
    let roots = list.iter().filter(|(s, _)| !list.iter().any(|(o, _)| contains(o, s))).count();
    let total = list.len();
    BruteForceCounts { classes, gdsw: total, gdsw_star: total - absorbed_edges, rgdsw: roots }
}

/// Interface values of the configured coarse space on a Dirichlet-free
/// operator; their number is the coarse dimension.
pub fn coarse_interface_values(
    mesh: &Mesh,
    grid: [usize; 3],
    config: &CoarseConfig,
    registry: &StrategyRegistry,
) -> Result<(CoarseBasis, DofRoles)> {
    use crate::decomposition::{build_components, classify_interface, partition_structured, ComponentContext};
    use crate::fem::{build_dof_map, BoundaryConditions};
    let partition = partition_structured(mesh, grid)?;
    let dofmap = build_dof_map(mesh, &BoundaryConditions::none())?;
    let ctx = ComponentContext { mesh };
    let u = build_components(
        &classify_interface(&partition, &dofmap, Field::Displacement),
        registry.get(&config.displacement)?.as_ref(),
        ctx,
    );
    let t = build_components(
        &classify_interface(&partition, &dofmap, Field::Temperature),
        registry.get(&config.temperature)?.as_ref(),
        ctx,
    );
    let roles = DofRoles::new(mesh, &partition, &vec![false; dofmap.num_dofs()]);
    Ok((interface_values(&u, &t, config, mesh, &roles), roles))
}

/// Largest deviation of per-field translation and constant column sums
/// from the interface indicator, over all interface DOFs.
pub fn partition_of_unity_error(basis: &CoarseBasis, roles: &DofRoles) -> f64 {
    let mut sums = vec![0.0; basis.num_dofs];
    for (col, info) in basis.columns.iter().zip(&basis.info) {
        if matches!(info.mode, Mode::Tx | Mode::Ty | Mode::Tz | Mode::Theta) {
            for &(r, v) in col {
                sums[r] += v;
            }
        }
    }
    (0..basis.num_dofs)
        .filter(|&d| roles.is_interface(d))
        .map(|d| (sums[d] - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Explicit two-level Schwarz operator assembled term by term from dense
/// inverses of the local blocks and a pseudo-inverse of the coarse
/// Galerkin matrix.
pub fn dense_preconditioner(pc: &SchwarzPreconditioner, k: &CsrMatrix) -> DMatrix<f64> {
    let n = k.nrows();
    let mut b = DMatrix::zeros(n, n);
    for s in 0..pc.num_subdomains() {
        let idx = pc.subdomain_dofs(s);
        let local_inv = refined_inverse(&k.submatrix(idx, idx).to_dense());
        let owned = pc.owned_dofs(s);
        let rows: Vec<usize> = match pc.options().first_level {
            FirstLevel::Additive => (0..idx.len()).collect(),
            FirstLevel::Restricted => owned.iter().map(|d| idx.binary_search(d).unwrap()).collect(),
        };
        for &li in &rows {
            for (lj, &gj) in idx.iter().enumerate() {
                b[(idx[li], gj)] += local_inv[(li, lj)];
            }
        }
    }
    if let Some(c) = pc.coarse() {
        let phi = c.phi.to_dense();
        let k0 = phi.transpose() * k.to_dense() * &phi;
        let scale = k0.abs().max();
        let k0_pinv = k0.pseudo_inverse(1e-10 * scale).expect("svd converges");
        b += &phi * k0_pinv * phi.transpose();
    }
    b
}

/// Dense inverse improved by one Newton-Schulz step `X + X(I − AX)`,
/// which squares the relative error of the LU-based inverse.
pub fn refined_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let x = a.clone().try_inverse().expect("block is invertible");
    let defect = DMatrix::identity(a.nrows(), a.ncols()) - a * &x;
    &x + &x * defect
}

/// Largest columnwise relative difference between two matrices.
pub fn max_column_error(a: &DMatrix<f64>, reference: &DMatrix<f64>) -> f64 {
    (0..reference.ncols())
        .map(|j| {
            let r = reference.column(j);
            let norm = r.norm();
            let diff = (a.column(j) - r).norm();
            if norm > 0.0 {
                diff / norm
            } else {
                diff
            }
        })
        .fold(0.0, f64::max)
}

/// Relative Frobenius error of the analytic tangent against central
/// differences of the residual, per field block `[uu, uθ, θu, θθ]`.
pub fn jacobian_block_errors(assembler: &Assembler, state: &State, step: f64) -> Result<[f64; 4]> {
    let (k, _) = assembler.assemble_raw(state)?;
    let k = k.to_dense();
    let n = state.d.len();
    let mut fd = DMatrix::zeros(n, n);
    let mut probe = state.clone();
    for j in 0..n {
        let h = step * state.d[j].abs().max(1.0);
        probe.d[j] = state.d[j] + h;
        let (_, rp) = assembler.assemble_raw(&probe)?;
        probe.d[j] = state.d[j] - h;
        let (_, rm) = assembler.assemble_raw(&probe)?;
        probe.d[j] = state.d[j];
        for i in 0..n {
            fd[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    let is_theta = |d: usize| d % DOFS_PER_NODE == THETA;
    let mut errors = [0.0; 4];
    for (b, (rows_t, cols_t)) in [(false, false), (false, true), (true, false), (true, true)].into_iter().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for i in (0..n).filter(|&i| is_theta(i) == rows_t) {
            for j in (0..n).filter(|&j| is_theta(j) == cols_t) {
                num += (k[(i, j)] - fd[(i, j)]).powi(2);
                den += k[(i, j)].powi(2);
            }
        }
        errors[b] = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    }
    Ok(errors)
}

/// Two elements along x with temperature-dependent steel, a displacement
/// and temperature field off equilibrium and distinct previous values.
pub fn jacobian_fixture() -> Result<(Assembler, State)> {
    let mesh = build_box_mesh([2.0, 1.0, 1.0], [2, 1, 1])?;
    let assembler = Assembler::new(&mesh, &MaterialTable::steel_1_4301(), 20.0)?;
    let mut state = State::initial(mesh.num_nodes(), 20.0, 1e-3)?;
    for n in 0..mesh.num_nodes() {
        let x = mesh.coord(n);
        for a in 0..3 {
            state.d_prev[dof(n, a)] = 1e-3 * ((n + a) as f64).sin();
            state.d[dof(n, a)] = state.d_prev[dof(n, a)] + 2e-3 * (x[0] + 0.5 * x[1] - x[2] + a as f64).cos();
        }
        state.d_prev[dof(n, THETA)] = 300.0 + 400.0 * x[0] + 50.0 * x[2];
        state.d[dof(n, THETA)] = state.d_prev[dof(n, THETA)] + 15.0 + 5.0 * x[1];
    }
    Ok((assembler, state))
}

/// Desk cube advanced by `steps` backward-Euler steps, and the Newton
/// system of the following step at its first iterate.
pub fn mid_simulation_system(scenario: Scenario, steps: usize) -> Result<(Simulation, BlockMatrix, Vec<f64>, Vec<bool>)> {
    let mut sim = Simulation::new(scenario)?;
    for _ in 0..steps {
        sim.step()?;
    }
    let t = sim.state.t + sim.state.dt;
    let dirichlet = sim.dirichlet_at(t);
    for (&d, &v) in &dirichlet {
        sim.state.d[d] = v;
    }
    sim.state.t = t;
    let (k, rhs, fixed) = sim.linear_system(&dirichlet)?;
    Ok((sim, k, rhs, fixed))
}

pub fn build_for(sim: &Simulation, k: &BlockMatrix, fixed: &[bool], options: &SchwarzOptions) -> Result<SchwarzPreconditioner> {
    let p = &sim.problem;
    let setup = SchwarzSetup {
        mesh: &p.mesh,
        partition: &p.partition,
        overlap: &p.overlap,
        u_components: &p.u_components,
        t_components: &p.t_components,
        fixed,
    };
    SchwarzPreconditioner::build(k, &setup, options)
}

fn check_combinatorics() -> Result<Vec<Check>> {
    let mesh = build_box_mesh([1.0; 3], [4, 4, 4])?;
    let reg = StrategyRegistry::with_defaults();
    let brute = brute_force_counts(&mesh, [2, 2, 2], |_| false);
    let mut out = vec![Check::new(
        "interface classes of a 2x2x2 grid",
        brute.classes == ClassCounts { faces: 12, edges: 6, vertices: 1 },
        format!("{:?}", brute.classes),
    )];
    for (label, want) in
        [("GDSW(T)-GDSW", 3 * brute.gdsw + brute.gdsw), ("GDSW*(T)-GDSW*", 4 * brute.gdsw_star), ("RGDSW(T)-RGDSW", 4 * brute.rgdsw)]
    {
        let config = CoarseConfig::parse(label, &reg)?;
        let (basis, _) = coarse_interface_values(&mesh, [2, 2, 2], &config, &reg)?;
        out.push(Check::new(
            &format!("coarse dimension {label}"),
            basis.num_columns() == want,
            format!("{} (enumerated {want})", basis.num_columns()),
        ));
    }
    Ok(out)
}

fn check_partition_of_unity() -> Result<Check> {
    let mesh = build_box_mesh([1.0; 3], [4, 4, 4])?;
    let reg = StrategyRegistry::with_defaults();
    let mut worst: f64 = 0.0;
    for name in ["GDSW", "GDSW*", "RGDSW"] {
        let config = CoarseConfig { displacement: name.into(), temperature: name.into(), ..Default::default() };
        let (basis, roles) = coarse_interface_values(&mesh, [2, 2, 2], &config, &reg)?;
        worst = worst.max(partition_of_unity_error(&basis, &roles));
    }
    Ok(Check::new("partition of unity of interface values", worst <= 1e-12, format!("max deviation {worst:.2e}")))
}

fn small_cube() -> Scenario {
    let mut s = Scenario::desk_cube([4; 3], [2; 3]);
    s.time.total = 2e-3;
    s
}

fn check_extension_and_oracle() -> Result<Vec<Check>> {
    let mut s = small_cube();
    s.coarse.truncation = Some(0.0);
    let (sim, k, _, fixed) = mid_simulation_system(s, 1)?;
    let mut options = sim.scenario.schwarz_options(sim.registry())?;
    let p = &sim.problem;
    let roles = DofRoles::new(&p.mesh, &p.partition, &fixed);
    let gamma = interface_values(&p.u_components, &p.t_components, &options.coarse, &p.mesh, &roles);
    let raw = crate::coarse::extend(&k.matrix, &roles, &gamma)?;
    let worst = extension_residuals(&k.matrix, &roles, &raw).into_iter().fold(0.0, f64::max);
    let mut out =
        vec![Check::new("discrete harmonic extension", worst <= 1e-10, format!("max relative residual {worst:.2e}"))];
    for first_level in [FirstLevel::Additive, FirstLevel::Restricted] {
        for two_level in [false, true] {
            options.first_level = first_level;
            options.two_level = two_level;
            let pc = build_for(&sim, &k, &fixed, &options)?;
            let err = max_column_error(&pc.to_dense(), &dense_preconditioner(&pc, &k.matrix));
            out.push(Check::new(
                &format!("dense oracle {} {}", mode_name(first_level), if two_level { "two-level" } else { "one-level" }),
                err <= 1e-12,
                format!("max column error {err:.2e}"),
            ));
        }
    }
    Ok(out)
}

fn mode_name(first_level: FirstLevel) -> &'static str {
    match first_level {
        FirstLevel::Additive => "additive",
        FirstLevel::Restricted => "restricted",
    }
}

fn check_exact_single_subdomain() -> Result<Check> {
    let mut s = Scenario::desk_cube([3; 3], [1; 3]);
    s.decomposition.two_level = false;
    s.decomposition.first_level = FirstLevel::Additive;
    let (sim, k, rhs, fixed) = mid_simulation_system(s, 0)?;
    let options = sim.scenario.schwarz_options(sim.registry())?;
    let pc = build_for(&sim, &k, &fixed, &options)?;
    let (_, stats) = gmres(&k.matrix, &rhs, &pc, &GmresOptions { rel_tol: 1e-12, ..Default::default() })?;
    Ok(Check::new(
        "one subdomain is an exact solve",
        stats.iterations == 1 && stats.converged,
        format!("{} iterations, relative residual {:.2e}", stats.iterations, stats.rel_residual),
    ))
}

fn check_jacobian() -> Result<Check> {
    let (assembler, state) = jacobian_fixture()?;
    let e = jacobian_block_errors(&assembler, &state, 1e-6)?;
    Ok(Check::new(
        "tangent against finite differences",
        e[0] <= 1e-4 && e[3] <= 1e-4 && e[1] <= 1e-3 && e[2] <= 1e-3,
        format!("uu {:.1e}, u-theta {:.1e}, theta-u {:.1e}, theta-theta {:.1e}", e[0], e[1], e[2], e[3]),
    ))
}

/// Fast invariant and oracle checks on built-in fixtures.
pub fn run_suite() -> Result<Vec<Check>> {
    let mut out = check_combinatorics()?;
    out.push(check_partition_of_unity()?);
    out.extend(check_extension_and_oracle()?);
    out.push(check_exact_single_subdomain()?);
    out.push(check_jacobian()?);
    Ok(out)
}
