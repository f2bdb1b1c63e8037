//! Interior/interface partitioning of the monolithic operator.

use crate::error::{invalid, Result};
use crate::linalg::CsrMatrix;

/// `K` permuted into `[[K_II, K_IΓ], [K_ΓI, K_ΓΓ]]`.
#[derive(Clone, Debug)]
pub struct InterfaceSplit {
    /// Free non-interface DOFs, grouped by owner when one is given.
    pub interior: Vec<usize>,
    pub interface: Vec<usize>,
    /// Offsets into `interior` delimiting the owner groups.
    pub group_offsets: Vec<usize>,
    pub k_ii: CsrMatrix,
    pub k_ig: CsrMatrix,
    pub k_gi: CsrMatrix,
    pub k_gg: CsrMatrix,
}

/// `constrained[d]` marks Dirichlet DOFs, which belong to neither block.
/// `owner[d]` groups interior DOFs, e.g. by nonoverlapping subdomain.
pub fn split_interface(
    k: &CsrMatrix,
    interface: &[usize],
    constrained: &[bool],
    owner: Option<&[usize]>,
) -> Result<InterfaceSplit> {
    let n = k.nrows();
    if constrained.len() != n || owner.is_some_and(|o| o.len() != n) {
        return Err(invalid("split_interface: mask length differs from matrix dimension"));
    }
    let mut on_interface = vec![false; n];
    for &d in interface {
        if d >= n {
            return Err(invalid(format!("interface DOF {d} out of range")));
        }
        if constrained[d] {
            return Err(invalid(format!("interface DOF {d} is a Dirichlet DOF")));
        }
        on_interface[d] = true;
    }
    let mut interface: Vec<usize> = interface.to_vec();
    interface.sort_unstable();
    interface.dedup();
    let mut interior: Vec<usize> = (0..n).filter(|&d| !on_interface[d] && !constrained[d]).collect();
    let mut group_offsets = vec![0];
    if let Some(owner) = owner {
        interior.sort_by_key(|&d| (owner[d], d));
        for w in 1..interior.len() {
            if owner[interior[w]] != owner[interior[w - 1]] {
                group_offsets.push(w);
            }
        }
    }
    group_offsets.push(interior.len());
    Ok(InterfaceSplit {
        k_ii: k.submatrix(&interior, &interior),
        k_ig: k.submatrix(&interior, &interface),
        k_gi: k.submatrix(&interface, &interior),
        k_gg: k.submatrix(&interface, &interface),
        interior,
        interface,
        group_offsets,
    })
}

impl InterfaceSplit {
    /// True when `K_II` has no entries coupling different owner groups.
    pub fn is_block_diagonal(&self) -> bool {
        let group_of = |local: usize| self.group_offsets.partition_point(|&o| o <= local) - 1;
        (0..self.k_ii.nrows()).all(|r| {
            let g = group_of(r);
            let (cols, vals) = self.k_ii.row(r);
            cols.iter().zip(vals).all(|(&c, &v)| v == 0.0 || group_of(c) == g)
        })
    }

    pub fn num_groups(&self) -> usize {
        self.group_offsets.len() - 1
    }
}
