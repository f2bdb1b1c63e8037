//! Run statistics and their CSV/JSON forms.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::schwarz::RecyclePolicy;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub newton_iters: usize,
    /// GMRES iterations of every linear solve of the step.
    pub gmres_iters: Vec<usize>,
    /// Coarse dimension at the first Newton iteration.
    pub coarse_dim: usize,
    pub residuals: Vec<f64>,
    /// Seconds.
    pub t_assemble: f64,
    pub t_pc: f64,
    pub t_solve: f64,
}

impl StepRecord {
    pub fn gmres_mean(&self) -> f64 {
        mean(&self.gmres_iters)
    }
}

fn mean(v: &[usize]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<usize>() as f64 / v.len() as f64
    }
}

/// Aggregates over a run: mean GMRES iterations over all linear systems,
/// mean Newton iterations per step and total times in seconds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub steps: usize,
    pub linear_solves: usize,
    pub it_gmres: f64,
    pub it_newton: f64,
    pub coarse_dim: usize,
    pub t_pc: f64,
    pub t_ass: f64,
    pub t_sol: f64,
    pub t_tot: f64,
}

impl Summary {
    pub fn of(steps: &[StepRecord], t_tot: f64) -> Self {
        let all: Vec<usize> = steps.iter().flat_map(|s| s.gmres_iters.iter().copied()).collect();
        let newton: Vec<usize> = steps.iter().map(|s| s.newton_iters).collect();
        Self {
            steps: steps.len(),
            linear_solves: all.len(),
            it_gmres: mean(&all),
            it_newton: mean(&newton),
            coarse_dim: steps.first().map_or(0, |s| s.coarse_dim),
            t_pc: steps.iter().map(|s| s.t_pc).sum(),
            t_ass: steps.iter().map(|s| s.t_assemble).sum(),
            t_sol: steps.iter().map(|s| s.t_solve).sum(),
            t_tot,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub preconditioner: String,
    pub recycle: RecyclePolicy,
    pub dofs: usize,
    pub subdomains: usize,
    pub steps: Vec<StepRecord>,
    pub summary: Summary,
    /// Set when a step failed; `steps` then holds the completed ones.
    pub failure: Option<String>,
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scenario: &str,
        preconditioner: &str,
        recycle: RecyclePolicy,
        dofs: usize,
        subdomains: usize,
        steps: Vec<StepRecord>,
        failure: Option<String>,
        t_tot: f64,
    ) -> Self {
        let summary = Summary::of(&steps, t_tot);
        Self {
            scenario: scenario.into(),
            preconditioner: preconditioner.into(),
            recycle,
            dofs,
            subdomains,
            steps,
            summary,
            failure,
        }
    }

    /// One row per step. Timing columns are left out with `timings = false`
    /// so that the output of repeated runs can be compared byte for byte.
    pub fn write_csv(&self, out: impl Write, timings: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["step", "time", "newton_iters", "gmres_iters_mean", "coarse_dim"];
        if timings {
            header.extend(["t_assemble", "t_pc", "t_solve"]);
        }
        w.write_record(&header)?;
        for s in &self.steps {
            let mut row = vec![
                s.step.to_string(),
                s.time.to_string(),
                s.newton_iters.to_string(),
                s.gmres_mean().to_string(),
                s.coarse_dim.to_string(),
            ];
            if timings {
                row.extend([s.t_assemble, s.t_pc, s.t_solve].map(|t| format!("{t:.6}")));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, mut out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }
}

/// Rows of a coarse-space comparison, one per configuration.
pub fn write_comparison_csv(reports: &[RunReport], out: impl Write, timings: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["preconditioner", "recycle", "coarse_dim", "it_gmres", "it_newton", "failed"];
    if timings {
        header.extend(["t_pc", "t_ass", "t_sol", "t_tot"]);
    }
    w.write_record(&header)?;
    for r in reports {
        let s = &r.summary;
        let mut row = vec![
            r.preconditioner.clone(),
            r.recycle.to_string(),
            s.coarse_dim.to_string(),
            format!("{:.4}", s.it_gmres),
            format!("{:.4}", s.it_newton),
            r.failure.is_some().to_string(),
        ];
        if timings {
            row.extend([s.t_pc, s.t_ass, s.t_sol, s.t_tot].map(|t| format!("{t:.3}")));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width table for terminals.
pub fn format_comparison(reports: &[RunReport]) -> String {
    let mut s = format!(
        "{:<20} {:<12} {:>8} {:>9} {:>6} {:>9} {:>9} {:>9} {:>9}\n",
        "preconditioner", "recycle", "coarse", "it_GMRES", "it_N", "T_PC", "T_Ass", "T_Sol", "T_Tot"
    );
    for r in reports {
        let m = &r.summary;
        s.push_str(&format!(
            "{:<20} {:<12} {:>8} {:>9.1} {:>6.1} {:>9.2} {:>9.2} {:>9.2} {:>9.2}{}\n",
            r.preconditioner,
            r.recycle.to_string(),
            m.coarse_dim,
            m.it_gmres,
            m.it_newton,
            m.t_pc,
            m.t_ass,
            m.t_sol,
            m.t_tot,
            if r.failure.is_some() { "  (failed)" } else { "" }
        ));
    }
    s
}
