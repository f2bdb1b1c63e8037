//! Two-level overlapping Schwarz preconditioners with GDSW-type coarse
//! spaces for a coupled thermo-elastic welding model.
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod coarse;
pub mod decomposition;
pub mod driver;
pub mod error;
pub mod fem;
pub mod krylov;
pub mod linalg;
pub mod materials;
pub mod schwarz;
pub mod verify;

pub use error::{Error, Result};
