use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use etcrb_core::design::Method;
use etcrb_harness::bench::{BenchSpec, DEFAULT_SIZES};
use etcrb_harness::sweep::Axis;
use etcrb_harness::validate::ValidateOptions;
use etcrb_harness::{run_bench, run_design, run_sweep, run_validate, write_csv, ScenarioConfig, SweepSpec};

/// Near-field extended-target CRB transmit design experiments.
///
/// Solver progress is printed when ETCRB_SOLVER_VERBOSE is set to 1 or more.
#[derive(Parser)]
#[command(name = "etcrb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario with one method and write a JSON artifact.
    Design {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "proposed-reduced")]
        method: Method,
        /// JSON output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the result row to this CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sweep one scenario parameter and write one CSV row per point and method.
    Sweep {
        /// Defaults to the reference scenario, or the larger target for `pmax`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// One of yc, L, phi, pmax (dBW), N.
        #[arg(long)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "proposed-reduced,focus,point-target,trm-et")]
        methods: Vec<Method>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the full and reduced relaxations over array sizes.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Report subspace dimensions only.
        #[arg(long)]
        dims_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the generator singular-value spectrum at each size here,
        /// one CSV per size with `-N<size>` appended to the stem.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Run the invariant suite at desk scale; exits nonzero on any failure.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Negate the derivative operator of this parameter first.
        #[arg(long)]
        inject_sign_flip: Option<usize>,
        /// Override the subspace tolerance.
        #[arg(long)]
        subspace_tol: Option<f64>,
        /// JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: Option<&Path>, default: ScenarioConfig) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(default),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn spectrum_path(base: &Path, n: usize) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("spectrum");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}-N{n}.{ext}"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Design { config, method, out, csv } => {
            let cfg = load(config.as_deref(), ScenarioConfig::default())?;
            let run = run_design(&cfg, method)?;
            let mut w = output(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &run.to_json(&cfg))?;
            writeln!(w)?;
            if let Some(p) = csv {
                write_csv(File::create(&p)?, std::slice::from_ref(&run.row))?;
            }
            eprintln!("{}: status {}, crb {:?}, feasible {}", method, run.row.status, run.row.crb, run.row.feasible);
        }
        Command::Sweep { config, axis, grid, methods, out } => {
            let default = if axis == Axis::Pmax { ScenarioConfig::power_sweep_default() } else { ScenarioConfig::default() };
            let cfg = load(config.as_deref(), default)?;
            let spec = SweepSpec::new(axis, grid, methods)?;
            let rows = run_sweep(&cfg, &spec)?;
            write_csv(output(out.as_deref())?, &rows)?;
        }
        Command::Bench { config, sizes, repeats, dims_only, out, spectrum } => {
            let cfg = load(config.as_deref(), ScenarioConfig::default())?;
            let spec = BenchSpec { sizes: sizes.unwrap_or_else(|| DEFAULT_SIZES.to_vec()), repeats, dims_only };
            if spec.sizes.is_empty() {
                bail!("no sizes given");
            }
            if let Some(base) = spectrum {
                for &n in &spec.sizes {
                    let mut c = cfg.clone();
                    c.array.elements = n;
                    let basis = c.build()?.basis()?;
                    write_csv(File::create(spectrum_path(&base, n))?, &basis.spectrum())?;
                }
            }
            let rows = run_bench(&cfg, &spec)?;
            write_csv(output(out.as_deref())?, &rows)?;
        }
        Command::Validate { config, inject_sign_flip, subspace_tol, out } => {
            let cfg = load(config.as_deref(), ScenarioConfig::default())?;
            let report = run_validate(&cfg, &ValidateOptions { inject_sign_flip, subspace_tol })?;
            print!("{report}");
            if let Some(p) = out {
                serde_json::to_writer_pretty(File::create(&p)?, &report)?;
            }
            if !report.passed() {
                eprintln!("validation failed: {} check(s)", report.failures().count());
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> Result<ExitCode> {
    run(Cli::parse())
}
