//! Temperature-dependent parameters of austenitic chrome-nickel steel 1.4301.
//!
//! Units follow mm–N–s–°C. Tabulated values are stored in model units after
//! applying their table scale factors (`E·1e4`, `α·1e-5`, `c·1e5`). The
//! density is kept in g/cm³ and converted by a single factor, see
//! [`MaterialTable::density_scale`].

use std::str::FromStr;

use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    YoungsModulus,
    PoissonRatio,
    ThermalExpansion,
    Conductivity,
    SpecificHeat,
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "e" | "youngs_modulus" => Param::YoungsModulus,
            "nu" | "poisson_ratio" => Param::PoissonRatio,
            "alpha" | "thermal_expansion" => Param::ThermalExpansion,
            "lambda" | "conductivity" => Param::Conductivity,
            "c" | "c_rho" | "specific_heat" => Param::SpecificHeat,
            other => return Err(invalid(format!("unknown material parameter `{other}`"))),
        })
    }
}

/// Piecewise-linear curve over strictly increasing temperatures, clamped
/// outside the tabulated range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("material curve needs at least one breakpoint"));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(invalid("material curve temperatures must be strictly increasing"));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(invalid("material curve contains non-finite values"));
        }
        Ok(Self { points })
    }

    pub fn constant(v: f64) -> Self {
        Self { points: vec![(0.0, v)] }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, t: f64) -> f64 {
        let p = &self.points;
        if t <= p[0].0 {
            return p[0].1;
        }
        let last = p[p.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        // first breakpoint strictly above t
        let k = p.partition_point(|&(tk, _)| tk <= t);
        let (t0, v0) = p[k - 1];
        if t == t0 {
            return v0;
        }
        let (t1, v1) = p[k];
        let s = (t - t0) / (t1 - t0);
        v0 + s * (v1 - v0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialTable {
    pub youngs_modulus: Curve,
    pub poisson_ratio: Curve,
    pub thermal_expansion: Curve,
    pub conductivity: Curve,
    pub specific_heat: Curve,
    /// Density in g/cm³ (7.919).
    pub density: f64,
    /// Factor turning `density` into model units; the default 1e-9 reads the
    /// value as 7.919e-9 in the mm–N–s system.
    #[serde(default = "default_density_scale")]
    pub density_scale: f64,
}

fn default_density_scale() -> f64 {
    1e-9
}

fn scaled(temps: &[f64], values: &[f64], scale: f64) -> Curve {
    Curve::new(temps.iter().zip(values).map(|(&t, &v)| (t, v * scale)).collect()).expect("embedded table is valid")
}

impl Default for MaterialTable {
    fn default() -> Self {
        Self::steel_1_4301()
    }
}

impl MaterialTable {
    pub fn steel_1_4301() -> Self {
        Self {
            youngs_modulus: scaled(
                &[20.0, 170.0, 400.0, 800.0, 1000.0, 1100.0, 1500.0],
                &[20.0, 19.1, 17.5, 12.5, 7.2, 1.6, 0.1],
                1e4,
            ),
            poisson_ratio: scaled(
                &[20.0, 183.0, 484.0, 799.0, 994.0, 1994.0, 2000.0],
                &[0.271, 0.284, 0.300, 0.319, 0.329, 0.364, 0.364],
                1.0,
            ),
            thermal_expansion: scaled(
                &[20.0, 200.0, 580.0, 1000.0, 1200.0, 1500.0, 2000.0],
                &[1.6, 1.81, 1.98, 2.13, 2.23, 2.23, 2.33],
                1e-5,
            ),
            conductivity: scaled(
                &[20.0, 200.0, 400.0, 600.0, 800.0, 1350.0, 1393.0, 1460.0],
                &[15.6, 18.1, 21.0, 23.8, 26.6, 34.4, 35.0, 60.0],
                1.0,
            ),
            specific_heat: scaled(
                &[20.0, 200.0, 400.0, 600.0, 800.0, 1350.0, 1427.0, 1442.0, 1460.0],
                &[5.11, 5.42, 5.75, 6.05, 6.30, 6.85, 7.30, 20.20, 50.00],
                1e5,
            ),
            density: 7.919,
            density_scale: default_density_scale(),
        }
    }

    /// Temperature-independent table.
    pub fn constant(e: f64, nu: f64, alpha: f64, lambda: f64, c: f64, density: f64) -> Self {
        Self {
            youngs_modulus: Curve::constant(e),
            poisson_ratio: Curve::constant(nu),
            thermal_expansion: Curve::constant(alpha),
            conductivity: Curve::constant(lambda),
            specific_heat: Curve::constant(c),
            density,
            density_scale: 1.0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let table: Self = toml::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        for p in [
            Param::YoungsModulus,
            Param::PoissonRatio,
            Param::ThermalExpansion,
            Param::Conductivity,
            Param::SpecificHeat,
        ] {
            Curve::new(self.curve(p).points.clone())?;
        }
        if let Some(&(_, nu)) = self.poisson_ratio.points.iter().find(|(_, nu)| *nu >= 0.5) {
            return Err(Error::SingularMaterial { nu });
        }
        Ok(())
    }

    pub fn curve(&self, param: Param) -> &Curve {
        match param {
            Param::YoungsModulus => &self.youngs_modulus,
            Param::PoissonRatio => &self.poisson_ratio,
            Param::ThermalExpansion => &self.thermal_expansion,
            Param::Conductivity => &self.conductivity,
            Param::SpecificHeat => &self.specific_heat,
        }
    }

    pub fn curve_mut(&mut self, param: Param) -> &mut Curve {
        match param {
            Param::YoungsModulus => &mut self.youngs_modulus,
            Param::PoissonRatio => &mut self.poisson_ratio,
            Param::ThermalExpansion => &mut self.thermal_expansion,
            Param::Conductivity => &mut self.conductivity,
            Param::SpecificHeat => &mut self.specific_heat,
        }
    }

    pub fn interpolate(&self, param: Param, t: f64) -> f64 {
        self.curve(param).eval(t)
    }

    /// Parameter lookup by name, e.g. `"E"` or `"conductivity"`.
    pub fn interpolate_named(&self, param: &str, t: f64) -> Result<f64> {
        Ok(self.interpolate(param.parse()?, t))
    }

    /// Density in model units.
    pub fn density_model(&self) -> f64 {
        self.density * self.density_scale
    }

    /// All parameters at one temperature.
    pub fn at(&self, t: f64) -> Result<MaterialPoint> {
        let e = self.interpolate(Param::YoungsModulus, t);
        let nu = self.interpolate(Param::PoissonRatio, t);
        let alpha = self.interpolate(Param::ThermalExpansion, t);
        let kappa = bulk_modulus(e, nu)?;
        Ok(MaterialPoint {
            tangent: elastic_tangent(e, nu)?,
            gamma: stress_temp_modulus(alpha, kappa),
            conductivity: self.interpolate(Param::Conductivity, t),
            heat_capacity: self.density_model() * self.interpolate(Param::SpecificHeat, t),
        })
    }
}

/// Material state at one quadrature point.
#[derive(Clone, Debug)]
pub struct MaterialPoint {
    pub tangent: Matrix6<f64>,
    /// `3 α κ`
    pub gamma: f64,
    pub conductivity: f64,
    /// `ρ c`
    pub heat_capacity: f64,
}

pub fn bulk_modulus(e: f64, nu: f64) -> Result<f64> {
    if nu >= 0.5 || nu.is_nan() {
        return Err(Error::SingularMaterial { nu });
    }
    Ok(e / (3.0 * (1.0 - 2.0 * nu)))
}

pub fn stress_temp_modulus(alpha: f64, kappa: f64) -> f64 {
    3.0 * alpha * kappa
}

/// Isotropic Hooke tensor in Voigt order `[11,22,33,13,12,23]` with
/// engineering shear strains.
pub fn elastic_tangent(e: f64, nu: f64) -> Result<Matrix6<f64>> {
    if nu >= 0.5 || nu.is_nan() {
        return Err(Error::SingularMaterial { nu });
    }
    let lame = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut c = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            c[(i, j)] = lame;
        }
        c[(i, i)] += 2.0 * mu;
        c[(i + 3, i + 3)] = mu;
    }
    Ok(c)
}
