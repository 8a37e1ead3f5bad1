use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical coefficients, boundary data and time grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialParams {
    /// Matrix compressibility.
    pub c_m: f64,
    /// Fracture compressibility.
    pub c_f: f64,
    /// Matrix permeability.
    pub k_m: f64,
    /// Fracture permeability.
    pub k_f: f64,
    /// Fluid viscosity.
    pub mu: f64,
    /// Fracture aperture.
    pub alpha: f64,
    /// Initial pressure.
    pub p0: f64,
    /// Pressure on the Dirichlet boundary.
    pub g: f64,
    /// Time step.
    pub tau: f64,
    /// Number of time steps.
    pub n_steps: usize,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            c_m: 0.4,
            c_f: 1.0,
            k_m: 1e-2,
            k_f: 1e3,
            mu: 1.0,
            alpha: 1.0,
            p0: 1.0,
            g: 10.0,
            tau: 3.0,
            n_steps: 300,
        }
    }
}

impl MaterialParams {
    pub fn t_max(&self) -> f64 {
        self.tau * self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_m", self.c_m),
            ("c_f", self.c_f),
            ("k_m", self.k_m),
            ("k_f", self.k_f),
            ("mu", self.mu),
            ("alpha", self.alpha),
            ("tau", self.tau),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.p0.is_finite() || !self.g.is_finite() {
            return Err(Error::Config("p0 and g must be finite".into()));
        }
        Ok(())
    }
}
