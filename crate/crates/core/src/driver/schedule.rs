//! Time-dependent Dirichlet data: the laser cylinder and the pulling load.

use super::scenario::{LaserSection, LoadInterpretation, LoadSection};
use crate::fem::Mesh;

/// Melting pool as a vertical cylinder resting at its initial position for
/// the initialization phase, then travelling along +x.
#[derive(Clone, Debug)]
pub struct Laser {
    pub center: [f64; 2],
    pub radius: f64,
    pub heating_rate: f64,
    pub melting_temperature: f64,
    pub init_duration: f64,
    pub velocity: f64,
}

impl Laser {
    pub fn new(section: &LaserSection, extent: [f64; 3]) -> Self {
        Self {
            center: section.center.unwrap_or([extent[0] / 2.0, extent[1] / 2.0]),
            radius: section.radius,
            heating_rate: section.heating_rate,
            melting_temperature: section.melting_temperature,
            init_duration: section.init_duration,
            velocity: section.velocity,
        }
    }

    pub fn axis_at(&self, t: f64) -> [f64; 2] {
        let travel = self.velocity * (t - self.init_duration).max(0.0);
        [self.center[0] + travel, self.center[1]]
    }

    /// Nodes within the cylinder at time `t`, in increasing order.
    pub fn covered_nodes(&self, mesh: &Mesh, t: f64) -> Vec<usize> {
        let c = self.axis_at(t);
        // tolerance keeps nodes exactly on the mantle inside
        let r2 = self.radius * self.radius * (1.0 + 1e-12);
        (0..mesh.num_nodes())
            .filter(|&n| {
                let x = mesh.coord(n);
                let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
                dx * dx + dy * dy <= r2
            })
            .collect()
    }

    /// Prescribed temperature of a covered node whose last committed value
    /// is `previous`. Uncovered nodes are free.
    pub fn ramp(&self, previous: f64, dt: f64) -> f64 {
        (previous + self.heating_rate * dt).min(self.melting_temperature)
    }
}

/// Displacement `u_y` prescribed on the plane y = l_y.
pub fn load_displacement(load: &LoadSection, t: f64, l_y: f64) -> f64 {
    if !load.enabled {
        return 0.0;
    }
    let elapsed = (t - load.start_time).max(0.0);
    let strain = load.strain.min(load.strain_rate * elapsed);
    match load.interpret {
        LoadInterpretation::Strain => strain * l_y,
        LoadInterpretation::Displacement => strain,
    }
}
