//! Trilinear hexahedron shape functions and Gauss quadrature.

use nalgebra::Matrix3;

use super::mesh::ElementGeometry;
use crate::error::{invalid, Error, Result};

/// Points and weights on the reference cube `[-1,1]³`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Tensor Gauss–Legendre rule with `n` points per axis, `n ∈ 1..=3`.
    pub fn gauss(n: usize) -> Result<Self> {
        let (x, w): (Vec<f64>, Vec<f64>) = match n {
            1 => (vec![0.0], vec![2.0]),
            2 => {
                let a = 1.0 / 3f64.sqrt();
                (vec![-a, a], vec![1.0, 1.0])
            }
            3 => {
                let a = (0.6f64).sqrt();
                (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
            }
            _ => return Err(invalid(format!("unsupported Gauss order {n}"))),
        };
        let mut points = Vec::with_capacity(n * n * n);
        let mut weights = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    points.push([x[i], x[j], x[k]]);
                    weights.push(w[i] * w[j] * w[k]);
                }
            }
        }
        Ok(Self { points, weights })
    }

    pub fn gauss_2x2x2() -> Self {
        Self::gauss(2).expect("order 2 is supported")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[inline]
fn corner_sign(a: usize, axis: usize) -> f64 {
    if (a >> axis) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

pub fn shape_values(xi: [f64; 3]) -> [f64; 8] {
    let mut n = [0.0; 8];
    for (a, value) in n.iter_mut().enumerate() {
        *value = (0..3).map(|d| 0.5 * (1.0 + corner_sign(a, d) * xi[d])).product();
    }
    n
}

/// Gradients with respect to reference coordinates.
pub fn shape_ref_gradients(xi: [f64; 3]) -> [[f64; 3]; 8] {
    let mut g = [[0.0; 3]; 8];
    for (a, grad) in g.iter_mut().enumerate() {
        let f = [0, 1, 2].map(|d| 0.5 * (1.0 + corner_sign(a, d) * xi[d]));
        let s = [0, 1, 2].map(|d| 0.5 * corner_sign(a, d));
        *grad = [s[0] * f[1] * f[2], f[0] * s[1] * f[2], f[0] * f[1] * s[2]];
    }
    g
}

/// Shape data at one quadrature point; `grad` is in physical coordinates
/// and `dv = weight · det J`.
#[derive(Clone, Copy, Debug)]
pub struct PointEval {
    pub n: [f64; 8],
    pub grad: [[f64; 3]; 8],
    pub det_j: f64,
    pub dv: f64,
}

pub fn shape_eval(rule: &QuadratureRule, geom: &ElementGeometry, element: usize) -> Result<Vec<PointEval>> {
    rule.points()
        .iter()
        .zip(rule.weights())
        .enumerate()
        .map(|(q, (&xi, &w))| {
            let n = shape_values(xi);
            let dref = shape_ref_gradients(xi);
            // J[i][j] = ∂x_i/∂ξ_j
            let mut jac = Matrix3::zeros();
            for a in 0..8 {
                for i in 0..3 {
                    for j in 0..3 {
                        jac[(i, j)] += geom[a][i] * dref[a][j];
                    }
                }
            }
            let det_j = jac.determinant();
            if !(det_j > 0.0) {
                return Err(Error::DegenerateElement { element, point: q, det: det_j });
            }
            let inv = jac.try_inverse().ok_or(Error::DegenerateElement { element, point: q, det: det_j })?;
            let mut grad = [[0.0; 3]; 8];
            for a in 0..8 {
                for i in 0..3 {
                    grad[a][i] = (0..3).map(|j| dref[a][j] * inv[(j, i)]).sum();
                }
            }
            Ok(PointEval { n, grad, det_j, dv: w * det_j })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(h: f64) -> ElementGeometry {
        std::array::from_fn(|a| [h * (a & 1) as f64, h * ((a >> 1) & 1) as f64, h * ((a >> 2) & 1) as f64])
    }

    #[test]
    fn weights_sum_to_reference_volume() {
        for n in 1..=3 {
            let r = QuadratureRule::gauss(n).unwrap();
            assert!((r.weights().iter().sum::<f64>() - 8.0).abs() < 1e-14);
        }
        assert!(QuadratureRule::gauss(4).is_err());
    }

    #[test]
    fn center_values_are_one_eighth() {
        for v in shape_values([0.0; 3]) {
            assert_eq!(v, 0.125);
        }
    }

    #[test]
    fn partition_of_unity_and_gradient_sum() {
        let mut geom = cube(1.0);
        geom[7] = [1.2, 1.1, 0.9];
        let pts = shape_eval(&QuadratureRule::gauss(3).unwrap(), &geom, 0).unwrap();
        for p in pts {
            assert!((p.n.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for d in 0..3 {
                assert!(p.grad.iter().map(|g| g[d]).sum::<f64>().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn volume_of_cube_with_edge_h() {
        let h = 0.37;
        let pts = shape_eval(&QuadratureRule::gauss_2x2x2(), &cube(h), 0).unwrap();
        let vol: f64 = pts.iter().map(|p| p.dv).sum();
        assert!((vol - h * h * h).abs() < 1e-15);
    }

    #[test]
    fn gradients_reproduce_linear_fields() {
        let mut geom = cube(2.0);
        geom[6] = [0.1, 2.3, 1.9];
        let f = |x: [f64; 3]| 3.0 * x[0] - 2.0 * x[1] + 0.5 * x[2] + 1.0;
        let pts = shape_eval(&QuadratureRule::gauss_2x2x2(), &geom, 0).unwrap();
        for p in pts {
            let g: Vec<f64> = (0..3).map(|d| (0..8).map(|a| p.grad[a][d] * f(geom[a])).sum()).collect();
            assert!((g[0] - 3.0).abs() < 1e-12 && (g[1] + 2.0).abs() < 1e-12 && (g[2] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn inverted_element_is_degenerate() {
        let mut geom = cube(1.0);
        geom.swap(0, 1);
        geom.swap(2, 3);
        geom.swap(4, 5);
        geom.swap(6, 7);
        let err = shape_eval(&QuadratureRule::gauss_2x2x2(), &geom, 5).unwrap_err();
        assert!(matches!(err, Error::DegenerateElement { element: 5, .. }));
    }
}
