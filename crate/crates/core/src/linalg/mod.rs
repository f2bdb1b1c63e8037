//! Linear algebra building blocks: sparse storage, sparse direct solves and
//! the rank-revealing dense solve used on the coarse level.

mod dense;
mod lu;
mod sparse;

pub use dense::{RankRevealingLu, DEFAULT_PIVOT_TOL};
pub use lu::{LuSymbolic, SparseLu};
pub use sparse::{dot, norm2, CsrMatrix};
