//! Partitioning, overlap, interface classification and coarse components.

pub mod classify;
pub mod components;
pub mod partition;

pub use classify::{classify_interface, classify_node_sets, write_classes_jsonl, ClassCounts, ClassKind, InterfaceClass};
pub use components::{
    build_components, Component, ComponentContext, ComponentSet, ComponentStrategy, Gdsw, GdswStar, Rgdsw,
    StrategyRegistry,
};
pub use partition::{grow_overlap, partition_structured, Overlap, Partition};
