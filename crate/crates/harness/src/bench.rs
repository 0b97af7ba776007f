//! Full versus reduced relaxation cost over array sizes.

use etcrb_core::design::{solve_full_sdr, solve_reduced_sdr, DesignSolution, Solver};
use etcrb_conic::SolveStatus;
use etcrb_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::Result;

pub const DEFAULT_SIZES: [usize; 6] = [16, 32, 48, 64, 96, 128];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario_hash: String,
    pub n: usize,
    pub r: usize,
    pub full_entries: usize,
    pub reduced_entries: usize,
    /// `1 - r^2 / N^2`, in percent.
    pub reduction_pct: f64,
    /// Median backend time; empty when censored.
    pub full_ms: Option<f64>,
    pub reduced_ms: Option<f64>,
    pub full_censored: bool,
    pub reduced_censored: bool,
    pub full_objective: Option<f64>,
    pub reduced_objective: Option<f64>,
    pub full_status: String,
    pub reduced_status: String,
}

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub sizes: Vec<usize>,
    pub repeats: usize,
    /// Skip solves entirely and report only dimensions.
    pub dims_only: bool,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self { sizes: DEFAULT_SIZES.to_vec(), repeats: 3, dims_only: false }
    }
}

struct Timing {
    median_ms: Option<f64>,
    censored: bool,
    objective: Option<f64>,
    status: String,
}

impl Timing {
    fn skipped(status: &str) -> Self {
        Self { median_ms: None, censored: true, objective: None, status: status.into() }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn time_solves(repeats: usize, mut solve: impl FnMut() -> etcrb_core::Result<DesignSolution>) -> Timing {
    let mut times = Vec::with_capacity(repeats);
    let mut objective = None;
    for _ in 0..repeats.max(1) {
        match solve() {
            Ok(sol) => {
                times.push(sol.diagnostics.solve_time.as_secs_f64() * 1e3);
                objective = Some(sol.objective);
            }
            Err(CoreError::SolverFailure { status: SolveStatus::TimeLimit, .. }) => return Timing::skipped("time-limit"),
            Err(e) => return Timing { median_ms: None, censored: false, objective: None, status: crate::run::error_status(&e) },
        }
    }
    Timing { median_ms: Some(median(times)), censored: false, objective, status: "optimal".into() }
}

/// Times both relaxations at each size. Once the full relaxation hits the
/// time limit, larger sizes are censored without solving.
pub fn run_bench(base: &ScenarioConfig, spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    base.validate()?;
    let mut rows = Vec::with_capacity(spec.sizes.len());
    let mut full_timed_out = false;
    for &n in &spec.sizes {
        let mut config = base.clone();
        config.array.elements = n;
        let scenario = config.build()?;
        let basis = scenario.basis()?;
        let r = basis.rank();
        let solver: Solver = config.solver();
        let (full, reduced) = if spec.dims_only {
            (Timing::skipped("not-run"), Timing::skipped("not-run"))
        } else {
            let reduced = time_solves(spec.repeats, || solve_reduced_sdr(&scenario.problem, &basis, &solver));
            let full = if full_timed_out {
                Timing::skipped("time-limit")
            } else {
                time_solves(spec.repeats, || solve_full_sdr(&scenario.problem, &solver))
            };
            full_timed_out |= full.status == "time-limit";
            (full, reduced)
        };
        rows.push(BenchRow {
            scenario_hash: config.hash(),
            n,
            r,
            full_entries: n * n,
            reduced_entries: r * r,
            reduction_pct: 100.0 * (1.0 - (r * r) as f64 / (n * n) as f64),
            full_ms: full.median_ms,
            reduced_ms: reduced.median_ms,
            full_censored: full.censored,
            reduced_censored: reduced.censored,
            full_objective: full.objective,
            reduced_objective: reduced.objective,
            full_status: full.status,
            reduced_status: reduced.status,
        });
    }
    Ok(rows)
}
