//! One-dimensional parameter sweeps.

use std::fmt;
use std::str::FromStr;

use etcrb_core::design::Method;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::run::{run_method_row, ResultRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Target center range coordinate, m.
    Yc,
    /// Semi-major axis, m; the aspect ratio of the base config is kept.
    L,
    /// Orientation, degrees.
    Phi,
    /// Power budget, dBW.
    Pmax,
    /// Number of array elements.
    N,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::Yc => "yc",
            Axis::L => "L",
            Axis::Phi => "phi",
            Axis::Pmax => "pmax",
            Axis::N => "N",
        }
    }

    /// The config at one grid point.
    pub fn apply(&self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut c = base.clone();
        match self {
            Axis::Yc => c.target.yc = value,
            Axis::L => {
                let ratio = base.target.width / base.target.length;
                c.target.length = value;
                c.target.width = value * ratio;
            }
            Axis::Phi => c.target.phi_deg = value,
            Axis::Pmax => c.power.pmax_dbw = value,
            Axis::N => {
                if value.fract() != 0.0 || value < 2.0 {
                    return Err(Error::Sweep(format!("N grid values must be integers >= 2, got {value}")));
                }
                c.array.elements = value as usize;
            }
        }
        Ok(c)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "yc" | "y_c" => Ok(Axis::Yc),
            "l" | "length" => Ok(Axis::L),
            "phi" => Ok(Axis::Phi),
            "pmax" | "p_max" => Ok(Axis::Pmax),
            "n" => Ok(Axis::N),
            _ => Err(Error::Sweep(format!("unknown axis {s:?} (expected yc, L, phi, pmax or N)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub methods: Vec<Method>,
}

impl SweepSpec {
    pub fn new(axis: Axis, grid: Vec<f64>, methods: Vec<Method>) -> Result<Self> {
        let spec = Self { axis, grid, methods };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Sweep("empty grid".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::Sweep("grid values must be finite".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Sweep("grid must be strictly increasing".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Sweep("no methods".into()));
        }
        Ok(())
    }
}

/// Rows for one grid point; every downstream object is rebuilt.
fn sweep_point(base: &ScenarioConfig, spec: &SweepSpec, value: f64) -> Vec<ResultRow> {
    let fail = |hash: String, status: String| -> Vec<ResultRow> {
        spec.methods
            .iter()
            .map(|&method| ResultRow {
                scenario_hash: hash.clone(),
                axis_value: Some(value),
                method,
                crb: None,
                feasible: false,
                r: None,
                variable_entries: None,
                solve_ms: 0.0,
                status: status.clone(),
            })
            .collect()
    };
    let config = match spec.axis.apply(base, value) {
        Ok(c) => c,
        Err(e) => return fail(base.hash(), format!("error: {e}")),
    };
    let hash = config.hash();
    let built = config.build().and_then(|s| s.basis().map(|b| (s, b)));
    let (scenario, basis) = match built {
        Ok(v) => v,
        Err(e) => return fail(hash, format!("error: {e}")),
    };
    let solver = config.solver();
    spec.methods.iter().map(|&m| run_method_row(&scenario, &basis, m, &solver, &hash, Some(value))).collect()
}

/// Runs all grid points concurrently; rows come back in grid order.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    base.validate()?;
    spec.validate()?;
    let per_point: Vec<Vec<ResultRow>> = spec.grid.par_iter().map(|&v| sweep_point(base, spec, v)).collect();
    Ok(per_point.into_iter().flatten().collect())
}
