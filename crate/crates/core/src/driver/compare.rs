//! Runs one scenario under several preconditioner configurations.

use super::report::RunReport;
use super::scenario::Scenario;
use super::simulation::Simulation;
use crate::error::Result;

/// One report per entry of `labels × recycle`, in that order.
pub fn compare(base: &Scenario) -> Result<Vec<RunReport>> {
    let mut reports = Vec::new();
    for label in &base.compare.labels {
        for &policy in &base.compare.recycle {
            let scenario = base.variant(label, policy)?;
            log::info!("compare: {label} with {policy}");
            reports.push(Simulation::new(scenario)?.run()?);
        }
    }
    Ok(reports)
}
