//! Welding scenario driver: configuration, constraint schedules, Newton and
//! time stepping, reports.

pub mod compare;
pub mod report;
pub mod scenario;
pub mod schedule;
pub mod simulation;

pub use compare::compare;
pub use report::{format_comparison, write_comparison_csv, RunReport, StepRecord, Summary};
pub use scenario::{
    BoundarySet, CoarseSection, CompareSection, Decomposition, Geometry, LaserSection, LoadInterpretation, LoadSection,
    NewtonSection, Scenario, TimeSection, ONE_LEVEL,
};
pub use schedule::{load_displacement, Laser};
pub use simulation::{NewtonOutcome, Problem, Simulation};
