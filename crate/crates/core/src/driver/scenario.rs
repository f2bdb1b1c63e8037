//! Scenario files: one TOML document per simulation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coarse::CoarseConfig;
use crate::decomposition::StrategyRegistry;
use crate::error::{invalid, Error, Result};
use crate::krylov::GmresOptions;
use crate::materials::MaterialTable;
use crate::schwarz::{FirstLevel, RecyclePolicy, SchwarzOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    /// Box lengths in mm.
    pub extent: [f64; 3],
    pub cells: [usize; 3],
}

impl Default for Geometry {
    fn default() -> Self {
        Self { extent: [10.0; 3], cells: [12; 3] }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySet {
    /// Clamped plane y=0 and the pulled plane y=l_y.
    #[default]
    Welding,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Decomposition {
    pub grid: [usize; 3],
    pub overlap: usize,
    pub first_level: FirstLevel,
    pub two_level: bool,
}

impl Default for Decomposition {
    fn default() -> Self {
        Self { grid: [2; 3], overlap: 1, first_level: FirstLevel::Restricted, two_level: true }
    }
}

/// Either a label such as `GDSW*(T+R)-RGDSW` or the individual fields; the
/// fields override the label.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoarseSection {
    pub label: Option<String>,
    pub displacement: Option<String>,
    pub temperature: Option<String>,
    pub rotations: Option<bool>,
    pub rotation_center: Option<[f64; 3]>,
    pub truncation: Option<f64>,
    pub pivot_tol: Option<f64>,
}

impl CoarseSection {
    pub fn resolve(&self, registry: &StrategyRegistry) -> Result<CoarseConfig> {
        let defaults = CoarseConfig::default();
        let mut c = match &self.label {
            Some(label) => CoarseConfig::parse(label, registry)?.with_truncation(defaults.truncation),
            None => defaults,
        };
        if let Some(v) = &self.displacement {
            c.displacement = registry.get(v)?.name().to_string();
        }
        if let Some(v) = &self.temperature {
            c.temperature = registry.get(v)?.name().to_string();
        }
        if let Some(v) = self.rotations {
            c.rotations = v;
        }
        if self.rotation_center.is_some() {
            c.rotation_center = self.rotation_center;
        }
        if let Some(v) = self.truncation {
            c.truncation = v;
        }
        c.validate(registry)?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    /// Step size in s.
    pub dt: f64,
    /// Simulated time in s; the step count is `round(total / dt)`.
    pub total: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { dt: 1e-3, total: 5e-3 }
    }
}

impl TimeSection {
    pub fn num_steps(&self) -> usize {
        (self.total / self.dt).round().max(0.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaserSection {
    pub enabled: bool,
    /// Initial axis position (x, y) in mm; the x-y center of the box if unset.
    pub center: Option<[f64; 2]>,
    pub radius: f64,
    /// °C/s.
    pub heating_rate: f64,
    pub melting_temperature: f64,
    /// Time the laser rests at its initial position, in s.
    pub init_duration: f64,
    /// Travel speed along +x in mm/s.
    pub velocity: f64,
}

impl Default for LaserSection {
    fn default() -> Self {
        Self {
            enabled: true,
            center: None,
            radius: 2.0,
            heating_rate: 14_400.0,
            melting_temperature: 1460.0,
            init_duration: 0.1,
            velocity: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadInterpretation {
    /// Scaled by the box length l_y.
    #[default]
    Strain,
    Displacement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadSection {
    pub enabled: bool,
    pub strain: f64,
    /// 1/s.
    pub strain_rate: f64,
    /// Onset of loading in s.
    pub start_time: f64,
    pub interpret: LoadInterpretation,
}

impl Default for LoadSection {
    fn default() -> Self {
        Self { enabled: true, strain: 0.03, strain_rate: 0.06, start_time: 0.0, interpret: LoadInterpretation::Strain }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSection {
    /// Bound on the Euclidean norm of the residual.
    pub abs_tol: f64,
    pub max_iter: usize,
    /// Consecutive residual increases treated as divergence.
    pub divergence_window: usize,
}

impl Default for NewtonSection {
    fn default() -> Self {
        Self { abs_tol: 1e-4, max_iter: 25, divergence_window: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub geometry: Geometry,
    pub boundary: BoundarySet,
    pub decomposition: Decomposition,
    pub coarse: CoarseSection,
    pub recycle: RecyclePolicy,
    pub time: TimeSection,
    /// °C.
    pub initial_temperature: f64,
    /// Stress-free temperature in °C.
    pub reference_temperature: f64,
    pub materials: MaterialTable,
    pub laser: LaserSection,
    pub load: LoadSection,
    pub newton: NewtonSection,
    pub gmres: GmresOptions,
    pub compare: CompareSection,
}

/// Configurations run by `compare`: coarse labels, or `one-level`, crossed
/// with recycling policies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub labels: Vec<String>,
    pub recycle: Vec<RecyclePolicy>,
}

impl Default for CompareSection {
    fn default() -> Self {
        let labels = ["GDSW", "GDSW*", "RGDSW"]
            .iter()
            .flat_map(|u| ["T", "T+R"].map(|m| format!("{u}({m})-RGDSW")))
            .collect();
        Self { labels, recycle: vec![RecyclePolicy::RebuildAll] }
    }
}

pub const ONE_LEVEL: &str = "one-level";

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "cube".into(),
            geometry: Geometry::default(),
            boundary: BoundarySet::Welding,
            decomposition: Decomposition::default(),
            coarse: CoarseSection::default(),
            recycle: RecyclePolicy::RebuildAll,
            time: TimeSection::default(),
            initial_temperature: 20.0,
            reference_temperature: 20.0,
            materials: MaterialTable::default(),
            laser: LaserSection::default(),
            load: LoadSection::default(),
            newton: NewtonSection::default(),
            gmres: GmresOptions::default(),
            compare: CompareSection::default(),
        }
    }
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl Scenario {
    /// Cube of `cells` elements split into `grid` subdomains, laser on the
    /// vertical center axis, five steps.
    pub fn desk_cube(cells: [usize; 3], grid: [usize; 3]) -> Self {
        Self {
            geometry: Geometry { extent: [10.0; 3], cells },
            decomposition: Decomposition { grid, ..Default::default() },
            ..Default::default()
        }
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let scenario: Self = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
            Error::ConfigParse { path: path.into(), line, column, message: e.message().trim().to_string() }
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time.dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {}", self.time.dt)));
        }
        if !(self.time.total >= 0.0) {
            return Err(invalid(format!("total time must be nonnegative, got {}", self.time.total)));
        }
        if !(self.laser.radius > 0.0) {
            return Err(invalid(format!("laser radius must be positive, got {}", self.laser.radius)));
        }
        if !(self.laser.init_duration >= 0.0) {
            return Err(invalid("laser initialization duration must be nonnegative"));
        }
        if !(self.newton.abs_tol > 0.0) || self.newton.max_iter == 0 {
            return Err(invalid("newton tolerance must be positive and the iteration cap nonzero"));
        }
        if self.geometry.extent.iter().any(|&l| !(l > 0.0)) {
            return Err(invalid("box lengths must be positive"));
        }
        self.materials.validate()?;
        self.coarse.resolve(&StrategyRegistry::with_defaults()).map(|_| ())
    }

    pub fn schwarz_options(&self, registry: &StrategyRegistry) -> Result<SchwarzOptions> {
        let defaults = SchwarzOptions::default();
        Ok(SchwarzOptions {
            first_level: self.decomposition.first_level,
            two_level: self.decomposition.two_level,
            overlap: self.decomposition.overlap,
            coarse: self.coarse.resolve(registry)?,
            coarse_pivot_tol: self.coarse.pivot_tol.unwrap_or(defaults.coarse_pivot_tol),
        })
    }

    /// Copy configured for one comparison entry.
    pub fn variant(&self, label: &str, recycle: RecyclePolicy) -> Result<Self> {
        let mut s = self.clone();
        s.recycle = recycle;
        if label.trim().eq_ignore_ascii_case(ONE_LEVEL) {
            s.decomposition.two_level = false;
        } else {
            s.decomposition.two_level = true;
            s.coarse.label = Some(label.to_string());
            s.coarse.displacement = None;
            s.coarse.temperature = None;
            s.coarse.rotations = None;
        }
        s.validate()?;
        Ok(s)
    }

    /// Label of the preconditioner, e.g. `GDSW*(T+R)-RGDSW` or `one-level`.
    pub fn preconditioner_label(&self, registry: &StrategyRegistry) -> Result<String> {
        if self.decomposition.two_level {
            Ok(self.coarse.resolve(registry)?.label())
        } else {
            Ok(ONE_LEVEL.into())
        }
    }
}
