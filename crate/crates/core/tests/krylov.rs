use lbw_dd::krylov::{gmres, GmresOptions, IdentityPreconditioner, StopReason};
use lbw_dd::linalg::{norm2, CsrMatrix, SparseLu};
use nalgebra::{DMatrix, DVector};

/// Five-point Laplacian on an `m × m` grid with a small convection term so
/// that the matrix is nonsymmetric.
fn convection_diffusion(m: usize) -> CsrMatrix {
    let n = m * m;
    let mut t = Vec::new();
    for j in 0..m {
        for i in 0..m {
            let r = i + m * j;
            t.push((r, r, 4.0));
            if i > 0 {
                t.push((r, r - 1, -1.2));
            }
            if i + 1 < m {
                t.push((r, r + 1, -0.8));
            }
            if j > 0 {
                t.push((r, r - m, -1.0));
            }
            if j + 1 < m {
                t.push((r, r + m, -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, t)
}

fn rhs(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect()
}

#[test]
fn converges_to_the_dense_solution() {
    let a = convection_diffusion(10);
    let b = rhs(100);
    let opts = GmresOptions { rel_tol: 1e-12, abs_tol: 0.0, ..Default::default() };
    let (x, stats) = gmres(&a, &b, &IdentityPreconditioner, &opts).unwrap();
    assert!(stats.converged);
    assert_eq!(stats.reason, StopReason::RelTol);
    let exact = a.to_dense().lu().solve(&DVector::from_vec(b.clone())).unwrap();
    let err: Vec<f64> = x.iter().zip(exact.iter()).map(|(p, q)| p - q).collect();
    assert!(norm2(&err) <= 1e-10 * exact.norm());
    let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| q - p).collect();
    assert!((norm2(&r) / norm2(&b) - stats.rel_residual).abs() <= 1e-12);
}

#[test]
fn exact_preconditioner_needs_one_iteration() {
    let a = convection_diffusion(8);
    let lu = SparseLu::factor(&a, "test").unwrap();
    let (_, stats) = gmres(&a, &rhs(64), &lu, &GmresOptions { rel_tol: 1e-12, ..Default::default() }).unwrap();
    assert_eq!(stats.iterations, 1);
}

#[test]
fn residual_does_not_grow_within_a_cycle() {
    let a = convection_diffusion(12);
    let b = rhs(144);
    let mut last = f64::INFINITY;
    for k in 1..30 {
        let opts = GmresOptions { rel_tol: 1e-14, abs_tol: 0.0, max_iter: k, restart: 200 };
        let (_, stats) = gmres(&a, &b, &IdentityPreconditioner, &opts).unwrap();
        assert!(stats.abs_residual <= last * (1.0 + 1e-10), "iteration {k}");
        last = stats.abs_residual;
    }
}

#[test]
fn restarting_reaches_the_same_solution() {
    let a = convection_diffusion(10);
    let b = rhs(100);
    let full = gmres(&a, &b, &IdentityPreconditioner, &GmresOptions { rel_tol: 1e-10, ..Default::default() }).unwrap();
    let short = GmresOptions { rel_tol: 1e-10, restart: 7, ..Default::default() };
    let restarted = gmres(&a, &b, &IdentityPreconditioner, &short).unwrap();
    assert!(restarted.1.converged);
    assert!(restarted.1.iterations >= full.1.iterations);
    let diff: Vec<f64> = full.0.iter().zip(&restarted.0).map(|(p, q)| p - q).collect();
    assert!(norm2(&diff) <= 1e-8 * norm2(&full.0));
}

#[test]
fn dense_matrix_through_the_operator_trait() {
    let d = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 3.0, 1.0, 1.0, 0.0, 4.0]);
    let a = CsrMatrix::from_dense(&d);
    let (x, stats) = gmres(&a, &[1.0, 2.0, 3.0], &IdentityPreconditioner, &GmresOptions::default()).unwrap();
    assert!(stats.converged && stats.iterations <= 3);
    let r = &d * DVector::from_vec(x) - DVector::from_vec(vec![1.0, 2.0, 3.0]);
    assert!(r.norm() <= 1e-6 * 14f64.sqrt());
}
