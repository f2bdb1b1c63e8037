//! Dense LU with complete pivoting for the coarse problem.
//!
//! Rotational modes restricted to a single-node vertex or a straight edge
//! coincide with combinations of translations, so the Galerkin operator can
//! be exactly rank deficient. Pivots below `tol * |first pivot|` end the
//! elimination, and the solve acts as a generalized inverse on the retained
//! block. Any generalized inverse yields the same coarse correction
//! `Φ K₀⁻ Φᵀ` when the dependence is exact.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct RankRevealingLu {
    lu: DMatrix<f64>,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    rank: usize,
}

pub const DEFAULT_PIVOT_TOL: f64 = 1e-13;

impl RankRevealingLu {
    pub fn factor(a: &DMatrix<f64>, tol: f64, block: &str) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::Factorization {
                block: block.into(),
                reason: format!("matrix is {}x{}", n, a.ncols()),
            });
        }
        let mut lu = a.clone();
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();

        let (mut piv_r, mut piv_c, mut piv_abs) = (0, 0, 0.0f64);
        for j in 0..n {
            for i in 0..n {
                let v = lu[(i, j)].abs();
                if v > piv_abs || v.is_nan() {
                    piv_abs = v;
                    piv_r = i;
                    piv_c = j;
                }
            }
        }
        if !piv_abs.is_finite() {
            return Err(Error::Factorization {
                block: block.into(),
                reason: "non-finite entries".into(),
            });
        }
        let first = piv_abs;
        let mut rank = 0;
        for k in 0..n {
            if piv_abs <= tol * first || piv_abs == 0.0 {
                break;
            }
            lu.swap_rows(k, piv_r);
            row_perm.swap(k, piv_r);
            lu.swap_columns(k, piv_c);
            col_perm.swap(k, piv_c);
            rank = k + 1;

            let pivot = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= pivot;
            }
            piv_abs = 0.0;
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                for i in k + 1..n {
                    let v = lu[(i, j)] - lu[(i, k)] * ukj;
                    lu[(i, j)] = v;
                    if v.abs() > piv_abs {
                        piv_abs = v.abs();
                        piv_r = i;
                        piv_c = j;
                    }
                }
            }
        }
        if rank == 0 && n > 0 {
            return Err(Error::Factorization {
                block: block.into(),
                reason: "matrix is zero".into(),
            });
        }
        Ok(Self {
            lu,
            row_perm,
            col_perm,
            rank,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let r = self.rank;
        let mut w: Vec<f64> = self.row_perm.iter().map(|&p| b[p]).collect();
        for j in 0..r {
            let wj = w[j];
            if wj != 0.0 {
                for i in j + 1..n {
                    w[i] -= self.lu[(i, j)] * wj;
                }
            }
        }
        let mut y = vec![0.0; n];
        for i in (0..r).rev() {
            let mut s = w[i];
            for j in i + 1..r {
                s -= self.lu[(i, j)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        let mut x = vec![0.0; n];
        for (k, &c) in self.col_perm.iter().enumerate() {
            x[c] = y[k];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rank_solve_matches_nalgebra() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, 1.0, 3.0, -2.0, 0.0, 4.0, 1.0]);
        let b = [1.0, 2.0, 3.0];
        let x = RankRevealingLu::factor(&a, DEFAULT_PIVOT_TOL, "t").unwrap().solve(&b);
        let reference = a.clone().lu().solve(&nalgebra::DVector::from_column_slice(&b)).unwrap();
        for i in 0..3 {
            assert!((x[i] - reference[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn generalized_inverse_property_for_dependent_columns() {
        // A = F K Fᵀ with F of rank 2 and a duplicated column
        let f = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 1.0, 1.0, 2.0]);
        let k = DMatrix::from_row_slice(3, 3, &[3.0, 1.0, 0.0, -1.0, 2.0, 0.5, 0.0, 0.2, 1.0]);
        let a = f.transpose() * &k * &f;
        let lu = RankRevealingLu::factor(&a, 1e-12, "t").unwrap();
        assert_eq!(lu.rank(), 2);
        // A G A = A
        let mut g = DMatrix::zeros(3, 3);
        for j in 0..3 {
            let e: Vec<f64> = (0..3).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            let col = lu.solve(&e);
            for i in 0..3 {
                g[(i, j)] = col[i];
            }
        }
        let aga = &a * &g * &a;
        assert!((aga - &a).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn zero_matrix_is_rejected() {
        assert!(RankRevealingLu::factor(&DMatrix::zeros(2, 2), 1e-12, "zero").is_err());
    }
}
