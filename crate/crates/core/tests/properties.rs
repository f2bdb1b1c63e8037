use lbw_dd::coarse::CoarseConfig;
use lbw_dd::decomposition::{
    build_components, classify_interface, classify_node_sets, partition_structured, ClassCounts, ComponentContext,
    StrategyRegistry,
};
use lbw_dd::driver::{load_displacement, Laser, LaserSection, LoadSection};
use lbw_dd::fem::{build_box_mesh, build_dof_map, BoundaryConditions, Field};
use lbw_dd::verify::{brute_force_counts, coarse_interface_values, partition_of_unity_error};
use proptest::prelude::*;

fn grid_and_block() -> impl Strategy<Value = ([usize; 3], [usize; 3])> {
    (prop::array::uniform3(1usize..=3), prop::array::uniform3(2usize..=3))
        .prop_filter("needs an interface", |(g, _)| g.iter().product::<usize>() > 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn interface_values_partition_unity((grid, block) in grid_and_block(), variant in 0usize..3) {
        let cells = [grid[0] * block[0], grid[1] * block[1], grid[2] * block[2]];
        let mesh = build_box_mesh([1.0; 3], cells).unwrap();
        let registry = StrategyRegistry::with_defaults();
        let name = ["GDSW", "GDSW*", "RGDSW"][variant];
        let config = CoarseConfig::parse(&format!("{name}(T+R)-{name}"), &registry).unwrap();
        let (basis, roles) = coarse_interface_values(&mesh, grid, &config, &registry).unwrap();
        prop_assert!(partition_of_unity_error(&basis, &roles) <= 1e-12);
    }

    #[test]
    fn pipeline_agrees_with_enumeration((grid, block) in grid_and_block()) {
        let cells = [grid[0] * block[0], grid[1] * block[1], grid[2] * block[2]];
        let mesh = build_box_mesh([1.0; 3], cells).unwrap();
        let partition = partition_structured(&mesh, grid).unwrap();
        let dofmap = build_dof_map(&mesh, &BoundaryConditions::none()).unwrap();
        let classes = classify_interface(&partition, &dofmap, Field::Displacement);
        let brute = brute_force_counts(&mesh, grid, |_| false);
        prop_assert_eq!(ClassCounts::of(&classes), brute.classes);
        let registry = StrategyRegistry::with_defaults();
        let ctx = ComponentContext { mesh: &mesh };
        let count = |name: &str| build_components(&classes, registry.get(name).unwrap().as_ref(), ctx).len();
        prop_assert_eq!(count("GDSW"), brute.gdsw);
        prop_assert_eq!(count("GDSW*"), brute.gdsw_star);
        prop_assert_eq!(count("RGDSW"), brute.rgdsw);
    }

    #[test]
    fn classification_ignores_input_order((grid, block) in grid_and_block(), shift in 0usize..1000, reverse: bool) {
        let cells = [grid[0] * block[0], grid[1] * block[1], grid[2] * block[2]];
        let mesh = build_box_mesh([1.0; 3], cells).unwrap();
        let partition = partition_structured(&mesh, grid).unwrap();
        let shared = partition.shared_nodes();
        let mut order = shared.clone();
        let len = order.len();
        order.rotate_left(shift % len);
        if reverse {
            order.reverse();
        }
        let mut a = classify_node_sets(shared.iter().map(|&n| (n, partition.node_subdomains(n))));
        let mut b = classify_node_sets(order.iter().map(|&n| (n, partition.node_subdomains(n))));
        a.sort_by(|x, y| x.subdomains.cmp(&y.subdomains));
        b.sort_by(|x, y| x.subdomains.cmp(&y.subdomains));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn load_is_nondecreasing(t1 in 0.0f64..2.0, dt in 0.0f64..1.0, start in 0.0f64..0.5) {
        let load = LoadSection { start_time: start, ..Default::default() };
        prop_assert!(load_displacement(&load, t1, 10.0) <= load_displacement(&load, t1 + dt, 10.0));
        prop_assert!(load_displacement(&load, t1 + dt, 10.0) <= load.strain * 10.0);
    }

    #[test]
    fn laser_ramp_never_passes_the_melting_temperature(previous in 0.0f64..1460.0, dt in 1e-5f64..1.0) {
        let laser = Laser::new(&LaserSection::default(), [10.0; 3]);
        let next = laser.ramp(previous, dt);
        prop_assert!(next <= 1460.0 && next >= previous);
    }
}
