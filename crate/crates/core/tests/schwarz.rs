use lbw_dd::assembly::BlockMatrix;
use lbw_dd::driver::{Scenario, Simulation};
use lbw_dd::fem::THETA;
use lbw_dd::krylov::Preconditioner;
use lbw_dd::linalg::norm2;
use lbw_dd::schwarz::{FirstLevel, RecyclePolicy, SchwarzOptions, SchwarzPreconditioner, SchwarzSetup};
use lbw_dd::verify::{build_for, mid_simulation_system};
use lbw_dd::Error;

fn small(grid: usize) -> (Simulation, BlockMatrix, Vec<f64>, Vec<bool>) {
    let mut s = Scenario::desk_cube([4; 3], [grid; 3]);
    s.time.total = 3e-3;
    mid_simulation_system(s, 1).unwrap()
}

fn options(sim: &Simulation, first_level: FirstLevel, two_level: bool) -> SchwarzOptions {
    let mut o = sim.scenario.schwarz_options(sim.registry()).unwrap();
    o.first_level = first_level;
    o.two_level = two_level;
    o
}

fn setup<'a>(sim: &'a Simulation, fixed: &'a [bool]) -> SchwarzSetup<'a> {
    let p = &sim.problem;
    SchwarzSetup {
        mesh: &p.mesh,
        partition: &p.partition,
        overlap: &p.overlap,
        u_components: &p.u_components,
        t_components: &p.t_components,
        fixed,
    }
}

/// Matrix of the next Newton iterate: the temperature is nudged so that the
/// values change but the pattern does not.
fn perturbed(sim: &mut Simulation) -> BlockMatrix {
    for (i, d) in sim.state.d.iter_mut().enumerate() {
        if i % 4 == THETA {
            *d += 5.0;
        }
    }
    let dirichlet = sim.dirichlet_at(sim.state.t);
    sim.linear_system(&dirichlet).unwrap().0
}

fn test_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 37 % 101) as f64 - 50.0) / 50.0).collect()
}

#[test]
fn one_subdomain_inverts_the_operator() {
    let (sim, k, _, fixed) = small(1);
    for first_level in [FirstLevel::Additive, FirstLevel::Restricted] {
        let pc = build_for(&sim, &k, &fixed, &options(&sim, first_level, false)).unwrap();
        let r = test_vector(k.dim());
        let z = pc.apply_to(&k, &r).unwrap();
        let kz = k.matrix.mul_vec(&z);
        let err: Vec<f64> = kz.iter().zip(&r).map(|(a, b)| a - b).collect();
        assert!(norm2(&err) <= 1e-10 * norm2(&r));
    }
}

#[test]
fn zero_residual_gives_zero_correction() {
    let (sim, k, _, fixed) = small(2);
    let pc = build_for(&sim, &k, &fixed, &options(&sim, FirstLevel::Restricted, true)).unwrap();
    let z = pc.apply_to(&k, &vec![0.0; k.dim()]).unwrap();
    assert!(z.iter().all(|&v| v == 0.0));
}

#[test]
fn restricted_weights_partition_unity() {
    let (sim, k, _, fixed) = small(2);
    let pc = build_for(&sim, &k, &fixed, &options(&sim, FirstLevel::Restricted, false)).unwrap();
    assert!(pc.restricted_weight_sums().iter().all(|&w| w == 1.0));
    let mut owned: Vec<usize> = (0..pc.num_subdomains()).flat_map(|s| pc.owned_dofs(s)).collect();
    owned.sort_unstable();
    assert_eq!(owned, (0..k.dim()).collect::<Vec<_>>());
}

#[test]
fn one_level_has_no_coarse_part() {
    let (sim, k, _, fixed) = small(2);
    let pc = build_for(&sim, &k, &fixed, &options(&sim, FirstLevel::Additive, false)).unwrap();
    assert!(pc.coarse().is_none());
    assert_eq!(pc.coarse_dim(), 0);
}

#[test]
fn recycling_policies() {
    let (mut sim, k, _, fixed) = small(2);
    let opts = options(&sim, FirstLevel::Restricted, true);
    let built = build_for(&sim, &k, &fixed, &opts).unwrap();
    let (phi0, k00) = {
        let c = built.coarse().unwrap();
        (c.phi.clone(), c.operator.clone())
    };
    let k2 = perturbed(&mut sim);
    let r = test_vector(k.dim());

    let mut reuse_all = build_for(&sim, &k, &fixed, &opts).unwrap();
    reuse_all.update(&k2, &setup(&sim, &fixed), RecyclePolicy::ReuseAll).unwrap();
    let c = reuse_all.coarse().unwrap();
    assert_eq!(c.phi, phi0);
    assert_eq!(c.operator, k00);

    let mut reuse_phi = build_for(&sim, &k, &fixed, &opts).unwrap();
    reuse_phi.update(&k2, &setup(&sim, &fixed), RecyclePolicy::ReusePhi).unwrap();
    let c = reuse_phi.coarse().unwrap();
    assert_eq!(c.phi, phi0);
    assert_ne!(c.operator, k00);
    assert_eq!(c.stamp, k2.stamp);

    let mut rebuilt = build_for(&sim, &k, &fixed, &opts).unwrap();
    rebuilt.update(&k2, &setup(&sim, &fixed), RecyclePolicy::RebuildAll).unwrap();
    let fresh = build_for(&sim, &k2, &fixed, &opts).unwrap();
    assert_eq!(rebuilt.coarse().unwrap().phi, fresh.coarse().unwrap().phi);
    let a = rebuilt.apply_to(&k2, &r).unwrap();
    let b = fresh.apply_to(&k2, &r).unwrap();
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    assert!(norm2(&diff) <= 1e-12 * norm2(&b));
}

#[test]
fn stale_preconditioner_is_rejected() {
    let (mut sim, k, _, fixed) = small(2);
    let pc = build_for(&sim, &k, &fixed, &options(&sim, FirstLevel::Restricted, true)).unwrap();
    let k2 = perturbed(&mut sim);
    assert!(matches!(pc.apply_to(&k2, &vec![1.0; k2.dim()]), Err(Error::Misuse(_))));
    assert!(pc.apply_to(&k, &[1.0; 3]).is_err());
    // the trait form used inside GMRES checks nothing and stays usable
    let mut z = vec![0.0; k.dim()];
    Preconditioner::apply(&pc, &vec![1.0; k.dim()], &mut z);
    assert!(z.iter().all(|v| v.is_finite()));
}

#[test]
fn coarse_space_emptied_by_truncation_is_a_configuration_error() {
    let (sim, k, _, fixed) = small(2);
    let mut opts = options(&sim, FirstLevel::Restricted, true);
    opts.coarse.truncation = 1e30;
    assert!(matches!(build_for(&sim, &k, &fixed, &opts), Err(Error::Configuration(_))));
}

#[test]
fn update_rejects_a_different_dimension() {
    let (sim, k, _, fixed) = small(2);
    let mut pc = build_for(&sim, &k, &fixed, &options(&sim, FirstLevel::Restricted, false)).unwrap();
    let mut bigger = Scenario::desk_cube([6; 3], [2; 3]);
    bigger.time.total = 1e-3;
    let (big_sim, big_k, _, big_fixed) = mid_simulation_system(bigger, 0).unwrap();
    assert!(matches!(
        pc.update(&big_k, &setup(&big_sim, &big_fixed), RecyclePolicy::RebuildAll),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn dense_form_matches_apply() {
    let (sim, k, _, fixed) = small(2);
    let pc: SchwarzPreconditioner = build_for(&sim, &k, &fixed, &options(&sim, FirstLevel::Additive, true)).unwrap();
    let dense = pc.to_dense();
    let r = test_vector(k.dim());
    let z = pc.apply_to(&k, &r).unwrap();
    let dz = &dense * nalgebra::DVector::from_vec(r);
    let diff: Vec<f64> = z.iter().zip(dz.iter()).map(|(a, b)| a - b).collect();
    assert!(norm2(&diff) <= 1e-12 * norm2(&z));
}
