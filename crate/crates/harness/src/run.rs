//! Single-scenario runs and the result-row schema.

use std::io::Write;

use etcrb_core::baselines::{center_steering, focus_design, point_target_design, trm_et_design};
use etcrb_core::design::{solve_full_sdr, solve_reduced_sdr, verify_solution, DesignSolution, Method, Solver, Tolerances, VerificationReport};
use etcrb_core::subspace::SubspaceBasis;
use serde::{Deserialize, Serialize};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::{Error, Result};

/// One CSV row per (axis value, method). Field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario_hash: String,
    pub axis_value: Option<f64>,
    pub method: Method,
    /// Recomputed from the returned covariance; empty when nothing was
    /// returned, `inf` when the Fisher matrix is singular.
    pub crb: Option<f64>,
    pub feasible: bool,
    pub r: Option<usize>,
    /// Entries per covariance variable in the solved problem.
    pub variable_entries: Option<usize>,
    pub solve_ms: f64,
    pub status: String,
}

impl ResultRow {
    fn failed(hash: &str, axis_value: Option<f64>, method: Method, r: Option<usize>, status: String) -> Self {
        Self {
            scenario_hash: hash.to_string(),
            axis_value,
            method,
            crb: None,
            feasible: false,
            r,
            variable_entries: None,
            solve_ms: 0.0,
            status,
        }
    }
}

/// Status string for a failed solve.
pub fn error_status(e: &etcrb_core::Error) -> String {
    use etcrb_core::Error as E;
    match e {
        E::Infeasible { status } | E::SolverFailure { status, .. } => status.to_string(),
        E::BaselineInfeasible(_) => "infeasible".into(),
        other => format!("error: {other}"),
    }
}

/// How the baselines are formulated; written into design outputs.
pub fn interpretation(method: Method) -> Option<&'static str> {
    match method {
        Method::PointTarget => Some("SDR over a single scatterer at the target center with parameters (xc, yc); scored by the five-parameter CRB"),
        Method::TrmEt => Some("minimizes tr(Rx^-1) under the same SINR and power constraints; scored by the five-parameter CRB"),
        Method::Focus => Some("MRT user beams with SINR-tight powers, remaining power on the center steering vector"),
        _ => None,
    }
}

pub fn solve_method(scenario: &Scenario, basis: &SubspaceBasis<f64>, method: Method, solver: &Solver) -> etcrb_core::Result<DesignSolution> {
    let p = &scenario.problem;
    let center = scenario.eta.center();
    let mut sol = match method {
        Method::ProposedFull => solve_full_sdr(p, solver)?,
        Method::ProposedReduced => solve_reduced_sdr(p, basis, solver)?,
        Method::Focus => focus_design(p, &center_steering(&scenario.array, &center)?)?,
        Method::PointTarget => point_target_design(p, &scenario.array, center, solver)?,
        Method::TrmEt => trm_et_design(p, solver)?,
    };
    if matches!(method, Method::ProposedFull | Method::ProposedReduced | Method::PointTarget) {
        sol.recover(&p.channels)?;
    }
    Ok(sol)
}

/// Solves, verifies and summarizes one method. Solver outcomes such as
/// infeasibility become rows; other errors are returned.
pub fn run_method(
    scenario: &Scenario,
    basis: &SubspaceBasis<f64>,
    method: Method,
    solver: &Solver,
    hash: &str,
    axis_value: Option<f64>,
) -> etcrb_core::Result<(Option<(DesignSolution, VerificationReport)>, ResultRow)> {
    use etcrb_core::Error as E;
    let r = Some(basis.rank());
    let solved = solve_method(scenario, basis, method, solver)
        .and_then(|sol| verify_solution(&scenario.problem, &sol, &Tolerances::default()).map(|rep| (sol, rep)));
    let (sol, report) = match solved {
        Ok(v) => v,
        Err(e @ (E::Infeasible { .. } | E::SolverFailure { .. } | E::BaselineInfeasible(_))) => {
            return Ok((None, ResultRow::failed(hash, axis_value, method, r, error_status(&e))));
        }
        Err(e) => return Err(e),
    };
    let d = sol.diagnostics.variable_dim;
    let row = ResultRow {
        scenario_hash: hash.to_string(),
        axis_value,
        method,
        crb: Some(report.crb.value().unwrap_or(f64::INFINITY)),
        feasible: report.passed(),
        r,
        variable_entries: Some(d * d),
        solve_ms: sol.diagnostics.solve_time.as_secs_f64() * 1e3,
        status: sol.diagnostics.status.clone(),
    };
    Ok((Some((sol, report)), row))
}

/// Like [`run_method`], but every failure is recorded as a row.
pub fn run_method_row(
    scenario: &Scenario,
    basis: &SubspaceBasis<f64>,
    method: Method,
    solver: &Solver,
    hash: &str,
    axis_value: Option<f64>,
) -> ResultRow {
    match run_method(scenario, basis, method, solver, hash, axis_value) {
        Ok((_, row)) => row,
        Err(e) => ResultRow::failed(hash, axis_value, method, Some(basis.rank()), error_status(&e)),
    }
}

pub struct DesignRun {
    pub solution: Option<DesignSolution>,
    pub report: Option<VerificationReport>,
    pub row: ResultRow,
}

impl DesignRun {
    /// Self-contained JSON artifact for one design.
    pub fn to_json(&self, config: &ScenarioConfig) -> serde_json::Value {
        let hash = config.hash();
        let mut doc = match &self.solution {
            Some(s) => s.to_json(&hash),
            None => serde_json::json!({ "scenario_hash": hash, "method": self.row.method }),
        };
        doc["config"] = serde_json::to_value(config).expect("config serializes");
        doc["row"] = serde_json::to_value(&self.row).expect("row serializes");
        if let Some(rep) = &self.report {
            doc["verification"] = serde_json::to_value(&rep.checks).expect("checks serialize");
        }
        if let Some(text) = interpretation(self.row.method) {
            doc["interpretation"] = text.into();
        }
        doc
    }
}

/// Builds the scenario and runs one method end to end.
pub fn run_design(config: &ScenarioConfig, method: Method) -> Result<DesignRun> {
    let scenario = config.build()?;
    let basis = scenario.basis()?;
    let (out, row) = run_method(&scenario, &basis, method, &config.solver(), &config.hash(), None)
        .map_err(|source| Error::Scenario { context: format!("running {method}"), source })?;
    let (solution, report) = match out {
        Some((s, r)) => (Some(s), Some(r)),
        None => (None, None),
    };
    Ok(DesignRun { solution, report, row })
}

/// Writes rows with a header, LF line endings.
pub fn write_csv<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
