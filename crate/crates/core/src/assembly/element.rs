//! Thermo-elastic hexahedron with mean-dilatation B-bar.
//!
//! Residual per element, with `ε̇ = (ε(u) − ε(u_prev))/Δt`:
//!
//! ```text
//! r_u = ∫ B̄ᵀ (ℂ B̄ u − γ (θ − θ_ref) m)
//! r_θ = −∫ λ ∇N·∇θ − ∫ γ tr(ε̇) θ N − ∫ ρc (θ − θ_prev)/Δt N
//! ```
//!
//! Material parameters are evaluated at the previous-step temperature, so the
//! blocks returned here are the exact derivative `∂r/∂d`.

use nalgebra::{DMatrix, DVector, SMatrix, SVector, Vector6};

use crate::fem::{shape_eval, ElementGeometry, QuadratureRule, DOFS_PER_NODE, THETA};
use crate::error::Result;
use crate::materials::MaterialTable;

pub type StrainOperator = SMatrix<f64, 6, 24>;

/// Shape data and B-bar operator at one quadrature point.
#[derive(Clone, Debug)]
pub struct BbarPoint {
    pub n: [f64; 8],
    pub grad: [[f64; 3]; 8],
    pub dv: f64,
    pub b: StrainOperator,
}

#[derive(Clone, Debug)]
pub struct ElementShape {
    pub points: Vec<BbarPoint>,
    /// Volume-averaged divergence row `b̄`, equal to `mᵀ B̄` at every point.
    pub mean_divergence: SVector<f64, 24>,
    pub volume: f64,
}

/// Standard small-strain operator, Voigt order `[11,22,33,13,12,23]`,
/// columns `3a + axis`.
pub fn strain_operator(grad: &[[f64; 3]; 8]) -> StrainOperator {
    let mut b = StrainOperator::zeros();
    for (a, g) in grad.iter().enumerate() {
        let c = 3 * a;
        b[(0, c)] = g[0];
        b[(1, c + 1)] = g[1];
        b[(2, c + 2)] = g[2];
        b[(3, c)] = g[2];
        b[(3, c + 2)] = g[0];
        b[(4, c)] = g[1];
        b[(4, c + 1)] = g[0];
        b[(5, c + 1)] = g[2];
        b[(5, c + 2)] = g[1];
    }
    b
}

fn divergence_row(grad: &[[f64; 3]; 8]) -> SVector<f64, 24> {
    SVector::from_fn(|i, _| grad[i / 3][i % 3])
}

pub fn bbar_strain_operator(rule: &QuadratureRule, geom: &ElementGeometry, element: usize) -> Result<ElementShape> {
    let evals = shape_eval(rule, geom, element)?;
    let volume: f64 = evals.iter().map(|p| p.dv).sum();
    let mean_divergence = evals.iter().map(|p| divergence_row(&p.grad) * p.dv).sum::<SVector<f64, 24>>() / volume;
    let points = evals
        .iter()
        .map(|p| {
            let mut b = strain_operator(&p.grad);
            let delta = (mean_divergence - divergence_row(&p.grad)) / 3.0;
            for r in 0..3 {
                for c in 0..24 {
                    b[(r, c)] += delta[c];
                }
            }
            BbarPoint { n: p.n, grad: p.grad, dv: p.dv, b }
        })
        .collect();
    Ok(ElementShape { points, mean_divergence, volume })
}

/// Nodal values of one element in node-interleaved layout `4a + comp`.
pub type ElementVector = [f64; 32];

#[derive(Clone, Debug)]
pub struct ElementBlocks {
    pub k_uu: DMatrix<f64>,
    pub k_ut: DMatrix<f64>,
    pub k_tu: DMatrix<f64>,
    pub k_tt: DMatrix<f64>,
    pub r_u: DVector<f64>,
    pub r_t: DVector<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct ElementInput<'a> {
    pub current: &'a ElementVector,
    pub previous: &'a ElementVector,
    pub dt: f64,
    pub theta_ref: f64,
}

fn split_fields(v: &ElementVector) -> (SVector<f64, 24>, SVector<f64, 8>) {
    let u = SVector::<f64, 24>::from_fn(|i, _| v[DOFS_PER_NODE * (i / 3) + i % 3]);
    let t = SVector::<f64, 8>::from_fn(|a, _| v[DOFS_PER_NODE * a + THETA]);
    (u, t)
}

pub fn element_blocks(shape: &ElementShape, input: ElementInput<'_>, materials: &MaterialTable) -> Result<ElementBlocks> {
    let (u, theta) = split_fields(input.current);
    let (u_prev, theta_prev) = split_fields(input.previous);
    let dt = input.dt;
    let m = Vector6::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0);
    let dilatation_rate = shape.mean_divergence.dot(&(u - u_prev)) / dt;

    let mut k_uu = SMatrix::<f64, 24, 24>::zeros();
    let mut k_ut = SMatrix::<f64, 24, 8>::zeros();
    let mut k_tu = SMatrix::<f64, 8, 24>::zeros();
    let mut k_tt = SMatrix::<f64, 8, 8>::zeros();
    let mut r_u = SVector::<f64, 24>::zeros();
    let mut r_t = SVector::<f64, 8>::zeros();

    for p in &shape.points {
        let n = SVector::<f64, 8>::from(p.n);
        let mut g = SMatrix::<f64, 3, 8>::zeros();
        for a in 0..8 {
            for d in 0..3 {
                g[(d, a)] = p.grad[a][d];
            }
        }
        let mat = materials.at(n.dot(&theta_prev))?;
        let th = n.dot(&theta);
        // differences are formed nodally so that equilibrium states give an
        // exactly zero residual
        let th_rise = n.dot(&theta.add_scalar(-input.theta_ref));
        let th_change = n.dot(&(theta - theta_prev));
        let grad_th = g * theta.add_scalar(-theta[0]);
        let dv = p.dv;

        let cb = mat.tangent * p.b;
        k_uu += p.b.transpose() * cb * dv;
        let bm = p.b.transpose() * m;
        k_ut -= bm * n.transpose() * (mat.gamma * dv);
        k_tu -= n * shape.mean_divergence.transpose() * (mat.gamma * th * dv / dt);
        k_tt -= g.transpose() * g * (mat.conductivity * dv);
        k_tt -= n * n.transpose() * ((mat.gamma * dilatation_rate + mat.heat_capacity / dt) * dv);

        let sigma = cb * u - m * (mat.gamma * th_rise);
        r_u += p.b.transpose() * sigma * dv;
        r_t -= g.transpose() * grad_th * (mat.conductivity * dv);
        r_t -= n * ((mat.gamma * dilatation_rate * th + mat.heat_capacity * th_change / dt) * dv);
    }
    Ok(ElementBlocks {
        k_uu: DMatrix::from_column_slice(24, 24, k_uu.as_slice()),
        k_ut: DMatrix::from_column_slice(24, 8, k_ut.as_slice()),
        k_tu: DMatrix::from_column_slice(8, 24, k_tu.as_slice()),
        k_tt: DMatrix::from_column_slice(8, 8, k_tt.as_slice()),
        r_u: DVector::from_column_slice(r_u.as_slice()),
        r_t: DVector::from_column_slice(r_t.as_slice()),
    })
}

#[inline]
fn u_local(i: usize) -> usize {
    DOFS_PER_NODE * (i / 3) + i % 3
}

#[inline]
fn t_local(a: usize) -> usize {
    DOFS_PER_NODE * a + THETA
}

impl ElementBlocks {
    /// Element tangent and residual in node-interleaved layout.
    pub fn interleaved(&self) -> (DMatrix<f64>, DVector<f64>) {
        let mut k = DMatrix::zeros(32, 32);
        let mut r = DVector::zeros(32);
        for i in 0..24 {
            r[u_local(i)] = self.r_u[i];
            for j in 0..24 {
                k[(u_local(i), u_local(j))] = self.k_uu[(i, j)];
            }
            for b in 0..8 {
                k[(u_local(i), t_local(b))] = self.k_ut[(i, b)];
                k[(t_local(b), u_local(i))] = self.k_tu[(b, i)];
            }
        }
        for a in 0..8 {
            r[t_local(a)] = self.r_t[a];
            for b in 0..8 {
                k[(t_local(a), t_local(b))] = self.k_tt[(a, b)];
            }
        }
        (k, r)
    }
}
