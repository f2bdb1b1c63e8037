//! Right-preconditioned restarted GMRES.
//!
//! With right preconditioning the Arnoldi residual is the true residual of
//! the unpreconditioned system, so the stopping rule needs no extra work.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{dot, norm2, CsrMatrix, SparseLu};

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Exact solve with a factorized operator.
impl Preconditioner for SparseLu {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.solve_in_place(z);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmresOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-6, abs_tol: 1e-10, max_iter: 1000, restart: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    RelTol,
    AbsTol,
    MaxIter,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovStats {
    pub iterations: usize,
    /// `‖b − Kx‖ / ‖b‖`, or the absolute norm when `b = 0`.
    pub rel_residual: f64,
    pub abs_residual: f64,
    pub converged: bool,
    pub reason: StopReason,
}

/// Orthogonality loss that triggers a second Gram-Schmidt pass: the
/// orthogonalized vector kept less than this fraction of its norm.
const REORTH_THRESHOLD: f64 = 0.7;

fn classify(abs: f64, b_norm: f64, opts: &GmresOptions) -> Option<StopReason> {
    if abs <= opts.rel_tol * b_norm {
        Some(StopReason::RelTol)
    } else if abs <= opts.abs_tol {
        Some(StopReason::AbsTol)
    } else {
        None
    }
}

fn true_residual(k: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; b.len()];
    k.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

/// Solves `K x = b` from `x = 0`. Convergence means
/// `‖b − Kx‖ ≤ max(rel_tol·‖b‖, abs_tol)`.
pub fn gmres(
    k: &dyn LinearOperator,
    b: &[f64],
    p: &dyn Preconditioner,
    opts: &GmresOptions,
) -> Result<(Vec<f64>, KrylovStats)> {
    let n = k.dim();
    if b.len() != n {
        return Err(invalid(format!("right-hand side has length {}, operator {n}", b.len())));
    }
    if !(opts.rel_tol >= 0.0 && opts.abs_tol >= 0.0) || opts.rel_tol + opts.abs_tol == 0.0 || opts.restart == 0 {
        return Err(invalid("GMRES tolerances must be nonnegative, not both zero, and restart nonzero"));
    }
    let b_norm = norm2(b);
    let rel = |abs: f64| if b_norm > 0.0 { abs / b_norm } else { abs };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut beta = b_norm;
    let mut iterations = 0;
    let finish = |x: Vec<f64>, iterations, abs: f64, reason: Option<StopReason>| {
        let stats = KrylovStats {
            iterations,
            rel_residual: rel(abs),
            abs_residual: abs,
            converged: reason.is_some(),
            reason: reason.unwrap_or(StopReason::MaxIter),
        };
        Ok((x, stats))
    };
    if let Some(reason) = classify(beta, b_norm, opts) {
        return finish(x, 0, beta, Some(reason));
    }

    let m = opts.restart;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    while iterations < opts.max_iter {
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut j = 0;
        let mut breakdown = false;
        while j < m && iterations < opts.max_iter {
            p.apply(&basis[j], &mut z);
            k.apply(&z, &mut w);
            let w_norm = norm2(&w);
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i][j] = hij;
                w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let mut h_next = norm2(&w);
            if h_next < REORTH_THRESHOLD * w_norm {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    h[i][j] += c;
                    w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= c * vk);
                }
                h_next = norm2(&w);
            }
            h[j + 1][j] = h_next;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            if denom == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j][j] / denom;
                sn[j] = h[j + 1][j] / denom;
            }
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            iterations += 1;
            j += 1;
            // exact invariant subspace: the least-squares residual is zero
            breakdown = h_next <= f64::EPSILON * w_norm.max(f64::MIN_POSITIVE);
            if classify(g[j].abs(), b_norm, opts).is_some() || breakdown {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }
        // y = H⁻¹ g on the leading j×j triangle
        let mut y = vec![0.0; j];
        for i in (0..j).rev() {
            let s: f64 = (i + 1..j).map(|l| h[i][l] * y[l]).sum();
            y[i] = if h[i][i] != 0.0 { (g[i] - s) / h[i][i] } else { 0.0 };
        }
        let mut update = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, vk)| *u += yi * vk);
        }
        p.apply(&update, &mut z);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);
        r = true_residual(k, b, &x);
        beta = norm2(&r);
        if let Some(reason) = classify(beta, b_norm, opts) {
            return finish(x, iterations, beta, Some(reason));
        }
        if breakdown {
            // the Krylov space is exhausted; a restart would rebuild it
            break;
        }
    }
    finish(x, iterations, beta, None)
}
