//! Monolithic tangent and residual assembly for the coupled system.

pub mod assemble;
pub mod element;
pub mod split;

pub use assemble::{apply_dirichlet, fresh_stamp, Assembler, BlockMatrix, DirichletValues, State};
pub use element::{
    bbar_strain_operator, element_blocks, strain_operator, BbarPoint, ElementBlocks, ElementInput, ElementShape,
    ElementVector,
};
pub use split::{split_interface, InterfaceSplit};
