use approx::assert_relative_eq;
use lbw_dd::assembly::{bbar_strain_operator, element_blocks, Assembler, ElementInput, State};
use lbw_dd::fem::{build_box_mesh, dof, QuadratureRule, DOFS_PER_NODE, THETA};
use lbw_dd::materials::MaterialTable;
use nalgebra::DMatrix;

fn perturbed_state(assembler: &Assembler) -> State {
    let mesh = assembler.mesh();
    let mut state = State::initial(mesh.num_nodes(), 20.0, 1e-3).unwrap();
    for n in 0..mesh.num_nodes() {
        let x = mesh.coord(n);
        for a in 0..3 {
            state.d[dof(n, a)] = 1e-3 * (x[0] - 2.0 * x[1] + x[2] * a as f64).sin();
        }
        state.d_prev[dof(n, THETA)] = 200.0 + 300.0 * x[2];
        state.d[dof(n, THETA)] = state.d_prev[dof(n, THETA)] + 10.0 * x[0];
    }
    state
}

/// Element contributions scattered field block by field block, with the
/// shape data recomputed for every element.
fn dense_reference(assembler: &Assembler, state: &State) -> (DMatrix<f64>, Vec<f64>) {
    let mesh = assembler.mesh();
    let n = state.d.len();
    let mut k = DMatrix::zeros(n, n);
    let mut r = vec![0.0; n];
    let rule = QuadratureRule::gauss_2x2x2();
    for e in 0..mesh.num_elements() {
        let nodes = mesh.element_nodes(e);
        let shape = bbar_strain_operator(&rule, &mesh.element_geometry(e), e).unwrap();
        let mut cur = [0.0; 32];
        let mut prev = [0.0; 32];
        for (a, &node) in nodes.iter().enumerate() {
            for c in 0..DOFS_PER_NODE {
                cur[DOFS_PER_NODE * a + c] = state.d[dof(node, c)];
                prev[DOFS_PER_NODE * a + c] = state.d_prev[dof(node, c)];
            }
        }
        let input = ElementInput { current: &cur, previous: &prev, dt: state.dt, theta_ref: assembler.theta_ref() };
        let b = element_blocks(&shape, input, assembler.materials()).unwrap();
        let u_dof = |i: usize| dof(nodes[i / 3], i % 3);
        let t_dof = |a: usize| dof(nodes[a], THETA);
        for i in 0..24 {
            r[u_dof(i)] += b.r_u[i];
            for j in 0..24 {
                k[(u_dof(i), u_dof(j))] += b.k_uu[(i, j)];
            }
            for a in 0..8 {
                k[(u_dof(i), t_dof(a))] += b.k_ut[(i, a)];
                k[(t_dof(a), u_dof(i))] += b.k_tu[(a, i)];
            }
        }
        for a in 0..8 {
            r[t_dof(a)] += b.r_t[a];
            for c in 0..8 {
                k[(t_dof(a), t_dof(c))] += b.k_tt[(a, c)];
            }
        }
    }
    (k, r)
}

#[test]
fn sparse_assembly_matches_dense_scatter() {
    let mesh = build_box_mesh([2.0, 2.0, 2.0], [2, 2, 2]).unwrap();
    let assembler = Assembler::new(&mesh, &MaterialTable::steel_1_4301(), 20.0).unwrap();
    let state = perturbed_state(&assembler);
    let (k, r) = assembler.assemble_raw(&state).unwrap();
    let (k_ref, r_ref) = dense_reference(&assembler, &state);
    let scale = k_ref.abs().max();
    assert!((k.to_dense() - &k_ref).abs().max() <= 1e-12 * scale);
    let r_scale = r_ref.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (a, b) in r.iter().zip(&r_ref) {
        assert!((a - b).abs() <= 1e-12 * r_scale);
    }
}

#[test]
fn field_blocks_are_symmetric() {
    let mesh = build_box_mesh([2.0, 1.0, 1.0], [2, 1, 1]).unwrap();
    let assembler = Assembler::new(&mesh, &MaterialTable::steel_1_4301(), 20.0).unwrap();
    let state = perturbed_state(&assembler);
    let k = assembler.assemble_raw(&state).unwrap().0.to_dense();
    let n = k.nrows();
    let same_field = |i: usize, j: usize| (i % DOFS_PER_NODE == THETA) == (j % DOFS_PER_NODE == THETA);
    let scale = k.abs().max();
    for i in 0..n {
        for j in 0..n {
            if same_field(i, j) {
                assert!((k[(i, j)] - k[(j, i)]).abs() <= 1e-12 * scale, "({i},{j})");
            }
        }
    }
}

#[test]
fn linear_materials_give_an_affine_residual() {
    let mesh = build_box_mesh([1.0; 3], [2, 2, 2]).unwrap();
    let materials = MaterialTable::constant(2.0e5, 0.3, 0.0, 0.015, 0.5, 7.9e-9);
    let assembler = Assembler::new(&mesh, &materials, 20.0).unwrap();
    let state = perturbed_state(&assembler);
    let (k, r0) = assembler.assemble_raw(&state).unwrap();
    let mut moved = state.clone();
    let step: Vec<f64> = (0..state.d.len()).map(|i| 1e-2 * ((i * 7 % 13) as f64 - 6.0)).collect();
    for (d, s) in moved.d.iter_mut().zip(&step) {
        *d += s;
    }
    let (_, r1) = assembler.assemble_raw(&moved).unwrap();
    let ks = k.mul_vec(&step);
    let scale = r1.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for i in 0..r0.len() {
        assert_relative_eq!(r1[i], r0[i] + ks[i], epsilon = 1e-10 * scale);
    }
}

#[test]
fn uniform_temperature_and_rest_has_zero_residual() {
    let mesh = build_box_mesh([1.0; 3], [2, 2, 2]).unwrap();
    let assembler = Assembler::new(&mesh, &MaterialTable::steel_1_4301(), 20.0).unwrap();
    let state = State::initial(mesh.num_nodes(), 20.0, 1e-3).unwrap();
    let (_, r) = assembler.assemble_raw(&state).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-12));
}
