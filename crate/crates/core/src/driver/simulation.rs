//! Backward-Euler time loop with a Newton solve per step.

use std::path::Path;
use std::time::Instant;

use super::report::{RunReport, StepRecord};
use super::scenario::{BoundarySet, Scenario};
use super::schedule::{load_displacement, Laser};
use crate::assembly::{Assembler, BlockMatrix, DirichletValues, State};
use crate::decomposition::{
    build_components, classify_interface, grow_overlap, partition_structured, ComponentContext, ComponentSet,
    InterfaceClass, Overlap, Partition, StrategyRegistry,
};
use crate::error::{Error, Result};
use crate::fem::{build_box_mesh, build_dof_map, dof, write_vtk, BoundaryConditions, DofMap, Field, Mesh, Schedule, THETA};
use crate::krylov::{gmres, KrylovStats};
use crate::linalg::norm2;
use crate::schwarz::{RecyclePolicy, SchwarzOptions, SchwarzPreconditioner, SchwarzSetup};

/// Everything fixed for the lifetime of a scenario.
pub struct Problem {
    pub mesh: Mesh,
    pub dofmap: DofMap,
    pub partition: Partition,
    pub overlap: Overlap,
    pub u_classes: Vec<InterfaceClass>,
    pub t_classes: Vec<InterfaceClass>,
    pub u_components: ComponentSet,
    pub t_components: ComponentSet,
    pub assembler: Assembler,
    pub laser: Option<Laser>,
    pub options: SchwarzOptions,
}

impl Problem {
    pub fn new(scenario: &Scenario, registry: &StrategyRegistry) -> Result<Self> {
        scenario.validate()?;
        let mesh = build_box_mesh(scenario.geometry.extent, scenario.geometry.cells)?;
        let bc = match scenario.boundary {
            BoundarySet::Welding => BoundaryConditions::welding(),
            BoundarySet::None => BoundaryConditions::none(),
        };
        let dofmap = build_dof_map(&mesh, &bc)?;
        let partition = partition_structured(&mesh, scenario.decomposition.grid)?;
        let overlap = grow_overlap(&mesh, &partition, scenario.decomposition.overlap);
        let options = scenario.schwarz_options(registry)?;
        let u_classes = classify_interface(&partition, &dofmap, Field::Displacement);
        let t_classes = classify_interface(&partition, &dofmap, Field::Temperature);
        let ctx = ComponentContext { mesh: &mesh };
        let u_components = build_components(&u_classes, registry.get(&options.coarse.displacement)?.as_ref(), ctx);
        let t_components = build_components(&t_classes, registry.get(&options.coarse.temperature)?.as_ref(), ctx);
        let assembler = Assembler::new(&mesh, &scenario.materials, scenario.reference_temperature)?;
        let laser = scenario.laser.enabled.then(|| Laser::new(&scenario.laser, scenario.geometry.extent));
        Ok(Self {
            mesh,
            dofmap,
            partition,
            overlap,
            u_classes,
            t_classes,
            u_components,
            t_components,
            assembler,
            laser,
            options,
        })
    }

    pub fn num_dofs(&self) -> usize {
        self.dofmap.num_dofs()
    }
}

/// Outcome of one Newton solve.
#[derive(Clone, Debug, Default)]
pub struct NewtonOutcome {
    pub iterations: usize,
    pub gmres: Vec<KrylovStats>,
    /// Residual norms at entry of every iteration and after the last one.
    pub residuals: Vec<f64>,
    pub coarse_dim: usize,
    pub t_assemble: f64,
    pub t_pc: f64,
    pub t_solve: f64,
}

pub struct Simulation {
    pub scenario: Scenario,
    pub problem: Problem,
    pub state: State,
    registry: StrategyRegistry,
    preconditioner: Option<SchwarzPreconditioner>,
    step: usize,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self> {
        Self::with_registry(scenario, StrategyRegistry::with_defaults())
    }

    pub fn with_registry(scenario: Scenario, registry: StrategyRegistry) -> Result<Self> {
        let problem = Problem::new(&scenario, &registry)?;
        let state = State::initial(problem.mesh.num_nodes(), scenario.initial_temperature, scenario.time.dt)?;
        Ok(Self { scenario, problem, state, registry, preconditioner: None, step: 0 })
    }

    pub fn registry(&self) -> &StrategyRegistry {
        &self.registry
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn preconditioner(&self) -> Option<&SchwarzPreconditioner> {
        self.preconditioner.as_ref()
    }

    /// Dirichlet targets at time `t`: static supports, the load and the
    /// laser ramp from the last committed temperatures.
    pub fn dirichlet_at(&self, t: f64) -> DirichletValues {
        let l_y = self.problem.mesh.extent()[1];
        let u_d = load_displacement(&self.scenario.load, t, l_y);
        let mut values = DirichletValues::new();
        for c in self.problem.dofmap.constraints() {
            let v = match c.schedule {
                Schedule::Zero => 0.0,
                Schedule::Load => u_d,
                Schedule::Laser => continue,
            };
            values.insert(dof(c.node, c.component), v);
        }
        if let Some(laser) = &self.problem.laser {
            for n in laser.covered_nodes(&self.problem.mesh, t) {
                values.insert(dof(n, THETA), laser.ramp(self.state.theta_prev(n), self.state.dt));
            }
        }
        values
    }

    fn fixed_mask(&self, dirichlet: &DirichletValues) -> Vec<bool> {
        let mut fixed = vec![false; self.problem.num_dofs()];
        for &d in dirichlet.keys() {
            fixed[d] = true;
        }
        fixed
    }

    /// Operator, right-hand side and constraint mask for the current iterate
    /// under the given Dirichlet data.
    pub fn linear_system(&self, dirichlet: &DirichletValues) -> Result<(BlockMatrix, Vec<f64>, Vec<bool>)> {
        let (k, rhs) = self.problem.assembler.assemble(&self.state, dirichlet)?;
        Ok((k, rhs, self.fixed_mask(dirichlet)))
    }

    fn prepare_preconditioner(&mut self, k: &BlockMatrix, fixed: &[bool], first: bool) -> Result<()> {
        let p = &self.problem;
        let setup = SchwarzSetup {
            mesh: &p.mesh,
            partition: &p.partition,
            overlap: &p.overlap,
            u_components: &p.u_components,
            t_components: &p.t_components,
            fixed,
        };
        // the constraint set may change between steps, so the coarse level
        // is always rebuilt at the first Newton iteration
        let policy = if first { RecyclePolicy::RebuildAll } else { self.scenario.recycle };
        match &mut self.preconditioner {
            Some(pc) => pc.update(k, &setup, policy)?,
            None => self.preconditioner = Some(SchwarzPreconditioner::build(k, &setup, &p.options)?),
        }
        Ok(())
    }

    /// Newton iteration at the current time with the constrained DOFs set
    /// to their targets.
    pub fn newton_solve(&mut self, dirichlet: &DirichletValues) -> Result<NewtonOutcome> {
        for (&d, &v) in dirichlet {
            self.state.d[d] = v;
        }
        let settings = self.scenario.newton.clone();
        let mut out = NewtonOutcome::default();
        let mut increases = 0;
        loop {
            let t0 = Instant::now();
            let (k, rhs, fixed) = self.linear_system(dirichlet)?;
            out.t_assemble += t0.elapsed().as_secs_f64();
            let res = norm2(&rhs);
            if let Some(&last) = out.residuals.last() {
                increases = if res > last { increases + 1 } else { 0 };
            }
            out.residuals.push(res);
            if !res.is_finite() {
                return Err(self.failure("residual is not finite"));
            }
            if res <= settings.abs_tol {
                return Ok(out);
            }
            if increases >= settings.divergence_window {
                return Err(self.failure(&format!("residual grew in {increases} consecutive iterations")));
            }
            if out.iterations == settings.max_iter {
                return Err(self.failure(&format!("no convergence in {} iterations, residual {res:.3e}", out.iterations)));
            }
            let t1 = Instant::now();
            self.prepare_preconditioner(&k, &fixed, out.iterations == 0)?;
            out.t_pc += t1.elapsed().as_secs_f64();
            let pc = self.preconditioner.as_ref().expect("prepared above");
            pc.ensure_current(&k)?;
            if out.iterations == 0 {
                out.coarse_dim = pc.coarse_dim();
            }
            let t2 = Instant::now();
            let (delta, stats) = gmres(&k.matrix, &rhs, pc, &self.scenario.gmres)?;
            out.t_solve += t2.elapsed().as_secs_f64();
            if !stats.converged {
                log::warn!(
                    "step {}: GMRES stopped after {} iterations at relative residual {:.3e}",
                    self.step + 1,
                    stats.iterations,
                    stats.rel_residual
                );
            }
            out.gmres.push(stats);
            for (d, dd) in self.state.d.iter_mut().zip(&delta) {
                *d += dd;
            }
            out.iterations += 1;
        }
    }

    fn failure(&self, reason: &str) -> Error {
        Error::StepFailure { step: self.step + 1, reason: reason.into() }
    }

    /// Advances one time step and commits the state.
    pub fn step(&mut self) -> Result<(StepRecord, NewtonOutcome)> {
        let t = self.state.t + self.state.dt;
        self.state.t = t;
        let dirichlet = self.dirichlet_at(t);
        let outcome = self.newton_solve(&dirichlet)?;
        self.state.commit();
        self.step += 1;
        let record = StepRecord {
            step: self.step,
            time: t,
            newton_iters: outcome.iterations,
            gmres_iters: outcome.gmres.iter().map(|s| s.iterations).collect(),
            coarse_dim: outcome.coarse_dim,
            residuals: outcome.residuals.clone(),
            t_assemble: outcome.t_assemble,
            t_pc: outcome.t_pc,
            t_solve: outcome.t_solve,
        };
        Ok((record, outcome))
    }

    /// Runs the remaining steps. A failing step ends the run with a partial
    /// report. `dump` receives the simulation after every step.
    pub fn run_with(&mut self, mut dump: impl FnMut(&Simulation) -> Result<()>) -> Result<RunReport> {
        let start = Instant::now();
        let label = self.scenario.preconditioner_label(&self.registry)?;
        let mut steps = Vec::new();
        let mut failure = None;
        while self.step < self.scenario.time.num_steps() {
            match self.step() {
                Ok((record, _)) => steps.push(record),
                Err(e @ Error::StepFailure { .. }) => {
                    log::error!("{e}");
                    failure = Some(e.to_string());
                    break;
                }
                Err(e) => return Err(e),
            }
            dump(self)?;
        }
        Ok(RunReport::new(
            &self.scenario.name,
            &label,
            self.scenario.recycle,
            self.problem.num_dofs(),
            self.problem.partition.num_subdomains(),
            steps,
            failure,
            start.elapsed().as_secs_f64(),
        ))
    }

    pub fn run(&mut self) -> Result<RunReport> {
        self.run_with(|_| Ok(()))
    }

    /// Element averages of the strain component ε₂₂.
    pub fn strain_yy(&self) -> Vec<f64> {
        let shape = self.problem.assembler.element_shape();
        (0..self.problem.mesh.num_elements())
            .map(|e| {
                let nodes = self.problem.mesh.element_nodes(e);
                let mut u = nalgebra::SVector::<f64, 24>::zeros();
                for (a, &n) in nodes.iter().enumerate() {
                    for axis in 0..3 {
                        u[3 * a + axis] = self.state.d[dof(n, axis)];
                    }
                }
                shape.points.iter().map(|p| (p.b.row(1) * u)[0] * p.dv).sum::<f64>() / shape.volume
            })
            .collect()
    }

    /// Legacy VTK file with θ, ‖u‖ and ε₂₂.
    pub fn write_fields(&self, path: &Path) -> Result<()> {
        let mesh = &self.problem.mesh;
        let theta: Vec<f64> = (0..mesh.num_nodes()).map(|n| self.state.theta(n)).collect();
        let unorm: Vec<f64> = (0..mesh.num_nodes())
            .map(|n| {
                let u = self.state.displacement(n);
                (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()
            })
            .collect();
        let eps = self.strain_yy();
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        let title = format!("{} t={}", self.scenario.name, self.state.t);
        write_vtk(&mut f, mesh, &title, &[("theta", &theta), ("displacement_norm", &unorm)], &[("strain_yy", &eps)])?;
        Ok(())
    }
}
