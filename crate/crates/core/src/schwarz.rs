//! Two-level overlapping Schwarz preconditioner acting on the monolithic
//! system.
//!
//! Dirichlet DOFs stay in the operator as identity rows. They belong to the
//! local problems like any other DOF and are zero rows of the coarse basis.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::BlockMatrix;
use crate::coarse::{build_coarse_basis, galerkin, CoarseBasis, CoarseConfig, DofRoles};
use crate::decomposition::{ComponentSet, Overlap, Partition};
use crate::error::{invalid, Error, Result};
use crate::fem::{dof, Mesh, DOFS_PER_NODE};
use crate::krylov::Preconditioner;
use crate::linalg::{CsrMatrix, RankRevealingLu, SparseLu, DEFAULT_PIVOT_TOL};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstLevel {
    Additive,
    #[default]
    Restricted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecyclePolicy {
    #[default]
    RebuildAll,
    /// Keep Φ, recompute `K₀` and its factorization.
    ReusePhi,
    /// Keep Φ, `K₀` and its factorization.
    ReuseAll,
}

impl FromStr for RecyclePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "rebuild-all" | "none" => Ok(Self::RebuildAll),
            "reuse-phi" => Ok(Self::ReusePhi),
            "reuse-all" | "all" => Ok(Self::ReuseAll),
            _ => Err(invalid(format!("unknown recycle policy `{s}`; expected rebuild-all, reuse-phi or reuse-all"))),
        }
    }
}

impl fmt::Display for RecyclePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RebuildAll => "rebuild-all",
            Self::ReusePhi => "reuse-phi",
            Self::ReuseAll => "reuse-all",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzOptions {
    pub first_level: FirstLevel,
    pub two_level: bool,
    pub overlap: usize,
    pub coarse: CoarseConfig,
    /// Relative pivot threshold of the coarse factorization.
    pub coarse_pivot_tol: f64,
}

impl Default for SchwarzOptions {
    fn default() -> Self {
        Self {
            first_level: FirstLevel::Restricted,
            two_level: true,
            overlap: 1,
            coarse: CoarseConfig::default(),
            coarse_pivot_tol: DEFAULT_PIVOT_TOL,
        }
    }
}

/// Geometry and constraint data the preconditioner is built for.
#[derive(Clone, Copy)]
pub struct SchwarzSetup<'a> {
    pub mesh: &'a Mesh,
    pub partition: &'a Partition,
    pub overlap: &'a Overlap,
    pub u_components: &'a ComponentSet,
    pub t_components: &'a ComponentSet,
    /// Static and current Dirichlet DOFs.
    pub fixed: &'a [bool],
}

struct Subdomain {
    /// Sorted global DOFs of the overlapping subdomain.
    dofs: Vec<usize>,
    /// Local positions of the DOFs owned in the nonoverlapping partition.
    owned: Vec<usize>,
    lu: SparseLu,
}

pub struct CoarseLevel {
    pub basis: CoarseBasis,
    pub phi: CsrMatrix,
    phi_t: CsrMatrix,
    pub operator: CsrMatrix,
    solver: RankRevealingLu,
    /// Stamp of the matrix the Galerkin product was formed with.
    pub stamp: u64,
}

impl CoarseLevel {
    pub fn dim(&self) -> usize {
        self.phi.ncols()
    }

    pub fn rank(&self) -> usize {
        self.solver.rank()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SetupTimings {
    pub local: Duration,
    pub basis: Duration,
    pub coarse_operator: Duration,
}

impl SetupTimings {
    pub fn total(&self) -> Duration {
        self.local + self.basis + self.coarse_operator
    }
}

pub struct SchwarzPreconditioner {
    options: SchwarzOptions,
    dim: usize,
    stamp: u64,
    subdomains: Vec<Subdomain>,
    coarse: Option<CoarseLevel>,
    timings: SetupTimings,
    apply_nanos: AtomicU64,
    coarse_apply_nanos: AtomicU64,
}

fn overlap_dofs(overlap: &Overlap, partition: &Partition, s: usize) -> (Vec<usize>, Vec<usize>) {
    let mut dofs = Vec::with_capacity(DOFS_PER_NODE * overlap.nodes[s].len());
    let mut owned = Vec::new();
    for &n in &overlap.nodes[s] {
        for c in 0..DOFS_PER_NODE {
            if partition.node_owner(n) == s {
                owned.push(dofs.len());
            }
            dofs.push(dof(n, c));
        }
    }
    (dofs, owned)
}

fn factor_local(k: &CsrMatrix, s: usize, dofs: &[usize], symbolic: Option<&SparseLu>) -> Result<SparseLu> {
    let local = k.submatrix(dofs, dofs);
    let block = format!("subdomain {s}");
    match symbolic {
        Some(prev) if prev.symbolic().matches(&local) => SparseLu::factor_with(prev.symbolic().clone(), &local, &block),
        _ => SparseLu::factor(&local, &block),
    }
}

impl SchwarzPreconditioner {
    pub fn build(k: &BlockMatrix, setup: &SchwarzSetup<'_>, options: &SchwarzOptions) -> Result<Self> {
        if setup.overlap.layers != options.overlap {
            return Err(invalid(format!(
                "overlap has {} layers but the options ask for {}",
                setup.overlap.layers, options.overlap
            )));
        }
        if setup.fixed.len() != k.dim() {
            return Err(invalid("constraint mask does not match the operator"));
        }
        let start = Instant::now();
        let subdomains = (0..setup.partition.num_subdomains())
            .into_par_iter()
            .map(|s| {
                let (dofs, owned) = overlap_dofs(setup.overlap, setup.partition, s);
                let lu = factor_local(&k.matrix, s, &dofs, None)?;
                Ok(Subdomain { dofs, owned, lu })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut timings = SetupTimings { local: start.elapsed(), ..Default::default() };
        let mut pc = Self {
            options: options.clone(),
            dim: k.dim(),
            stamp: k.stamp,
            subdomains,
            coarse: None,
            timings: SetupTimings::default(),
            apply_nanos: AtomicU64::new(0),
            coarse_apply_nanos: AtomicU64::new(0),
        };
        if pc.has_coarse_level() {
            pc.coarse = Some(pc.build_coarse(k, setup, &mut timings)?);
        }
        pc.timings = timings;
        Ok(pc)
    }

    /// A single subdomain has no interface and is solved exactly by the
    /// first level alone.
    fn has_coarse_level(&self) -> bool {
        self.options.two_level && self.subdomains.len() > 1
    }

    fn build_coarse(&self, k: &BlockMatrix, setup: &SchwarzSetup<'_>, timings: &mut SetupTimings) -> Result<CoarseLevel> {
        let start = Instant::now();
        let roles = DofRoles::new(setup.mesh, setup.partition, setup.fixed);
        let basis =
            build_coarse_basis(&k.matrix, setup.mesh, &roles, setup.u_components, setup.t_components, &self.options.coarse)?;
        timings.basis += start.elapsed();
        let phi = basis.to_csr();
        if phi.nnz() == 0 {
            return Err(Error::Configuration(format!(
                "coarse space {} is empty; truncation {} removed every entry",
                self.options.coarse, self.options.coarse.truncation
            )));
        }
        self.finish_coarse(k, basis, phi, timings)
    }

    fn finish_coarse(
        &self,
        k: &BlockMatrix,
        basis: CoarseBasis,
        phi: CsrMatrix,
        timings: &mut SetupTimings,
    ) -> Result<CoarseLevel> {
        let start = Instant::now();
        let operator = galerkin(&k.matrix, &phi);
        let solver = RankRevealingLu::factor(&operator.to_dense(), self.options.coarse_pivot_tol, "coarse problem")?;
        timings.coarse_operator += start.elapsed();
        Ok(CoarseLevel { basis, phi_t: phi.transpose(), phi, operator, solver, stamp: k.stamp })
    }

    /// Refactors the local problems for `k` and treats the coarse level per
    /// `policy`. Setup timings restart from zero.
    pub fn update(&mut self, k: &BlockMatrix, setup: &SchwarzSetup<'_>, policy: RecyclePolicy) -> Result<()> {
        if k.dim() != self.dim {
            return Err(invalid(format!("operator dimension changed from {} to {}", self.dim, k.dim())));
        }
        let start = Instant::now();
        let factors = self
            .subdomains
            .par_iter()
            .enumerate()
            .map(|(s, sub)| factor_local(&k.matrix, s, &sub.dofs, Some(&sub.lu)))
            .collect::<Result<Vec<_>>>()?;
        for (sub, lu) in self.subdomains.iter_mut().zip(factors) {
            sub.lu = lu;
        }
        let mut timings = SetupTimings { local: start.elapsed(), ..Default::default() };
        if self.has_coarse_level() {
            let coarse = match (policy, self.coarse.take()) {
                (RecyclePolicy::ReuseAll, Some(c)) => c,
                (RecyclePolicy::ReusePhi, Some(c)) => self.finish_coarse(k, c.basis, c.phi, &mut timings)?,
                _ => self.build_coarse(k, setup, &mut timings)?,
            };
            self.coarse = Some(coarse);
        }
        self.stamp = k.stamp;
        self.timings = timings;
        Ok(())
    }

    /// Misuse error unless the local factorizations belong to `k`.
    pub fn ensure_current(&self, k: &BlockMatrix) -> Result<()> {
        if k.stamp != self.stamp || k.dim() != self.dim {
            return Err(Error::Misuse(format!(
                "preconditioner was built for operator #{} but applied with operator #{}; call update first",
                self.stamp, k.stamp
            )));
        }
        Ok(())
    }

    /// `apply` after checking the build stamp.
    pub fn apply_to(&self, k: &BlockMatrix, r: &[f64]) -> Result<Vec<f64>> {
        self.ensure_current(k)?;
        if r.len() != self.dim {
            return Err(invalid(format!("vector has length {}, preconditioner {}", r.len(), self.dim)));
        }
        let mut z = vec![0.0; self.dim];
        self.apply_into(r, &mut z);
        Ok(z)
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        let start = Instant::now();
        let local: Vec<Vec<f64>> = self
            .subdomains
            .par_iter()
            .map(|sub| {
                let mut x: Vec<f64> = sub.dofs.iter().map(|&d| r[d]).collect();
                sub.lu.solve_in_place(&mut x);
                x
            })
            .collect();
        z.fill(0.0);
        // summation in subdomain order keeps the result independent of
        // the thread schedule
        for (sub, x) in self.subdomains.iter().zip(&local) {
            match self.options.first_level {
                FirstLevel::Additive => {
                    for (&d, v) in sub.dofs.iter().zip(x) {
                        z[d] += v;
                    }
                }
                FirstLevel::Restricted => {
                    for &l in &sub.owned {
                        z[sub.dofs[l]] += x[l];
                    }
                }
            }
        }
        if let Some(c) = &self.coarse {
            let t = Instant::now();
            let y = c.solver.solve(&c.phi_t.mul_vec(r));
            for (zi, v) in z.iter_mut().zip(c.phi.mul_vec(&y)) {
                *zi += v;
            }
            self.coarse_apply_nanos.fetch_add(t.elapsed().as_nanos() as u64, Ordering::Relaxed);
        }
        self.apply_nanos.fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
    }

    pub fn options(&self) -> &SchwarzOptions {
        &self.options
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stamp(&self) -> u64 {
        self.stamp
    }

    pub fn num_subdomains(&self) -> usize {
        self.subdomains.len()
    }

    /// Global DOFs of overlapping subdomain `s`, sorted.
    pub fn subdomain_dofs(&self, s: usize) -> &[usize] {
        &self.subdomains[s].dofs
    }

    /// Global DOFs owned by subdomain `s` in the nonoverlapping partition.
    pub fn owned_dofs(&self, s: usize) -> Vec<usize> {
        let sub = &self.subdomains[s];
        sub.owned.iter().map(|&l| sub.dofs[l]).collect()
    }

    pub fn coarse(&self) -> Option<&CoarseLevel> {
        self.coarse.as_ref()
    }

    pub fn coarse_dim(&self) -> usize {
        self.coarse.as_ref().map_or(0, CoarseLevel::dim)
    }

    pub fn setup_timings(&self) -> SetupTimings {
        self.timings
    }

    /// Accumulated wall time of all applies and of their coarse parts.
    pub fn apply_timings(&self) -> (Duration, Duration) {
        (
            Duration::from_nanos(self.apply_nanos.load(Ordering::Relaxed)),
            Duration::from_nanos(self.coarse_apply_nanos.load(Ordering::Relaxed)),
        )
    }

    /// Sum of the restricted prolongation weights per DOF.
    pub fn restricted_weight_sums(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.dim];
        for s in 0..self.subdomains.len() {
            for d in self.owned_dofs(s) {
                w[d] += 1.0;
            }
        }
        w
    }

    /// Explicit preconditioner matrix, one apply per unit vector. Only for
    /// small problems.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        let mut e = vec![0.0; self.dim];
        let mut z = vec![0.0; self.dim];
        for j in 0..self.dim {
            e[j] = 1.0;
            self.apply_into(&e, &mut z);
            m.set_column(j, &nalgebra::DVector::from_column_slice(&z));
            e[j] = 0.0;
        }
        m
    }
}

impl Preconditioner for SchwarzPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.apply_into(r, z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_names() {
        for p in [RecyclePolicy::RebuildAll, RecyclePolicy::ReusePhi, RecyclePolicy::ReuseAll] {
            assert_eq!(p.to_string().parse::<RecyclePolicy>().unwrap(), p);
        }
        assert_eq!("reuse_all".parse::<RecyclePolicy>().unwrap(), RecyclePolicy::ReuseAll);
        assert!("sometimes".parse::<RecyclePolicy>().is_err());
    }
}
