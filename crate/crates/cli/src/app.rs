//! Argument definitions and subcommand dispatch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use releq::criteria::{classify, StabilityReport};
use releq::dynamics::{default_dt, integrate, perturbed_equilibrium, period, write_trajectory_csv, PhaseState};
use releq::oracle::full_spectrum_with_tol;
use releq::{lagrange_triangle, Classification, MassVector, PotentialSpec};

use crate::error::{CliError, Result};
use crate::radius::{default_f_values, radius_curve};
use crate::sweep::{components, label_counts, sweep_to_files, Format, SweepConfig};
use crate::verify::verify;

#[derive(Debug, Parser)]
#[command(name = "releq", version, about = "Spectral stability of Lagrange triangles under homogeneous and quasihomogeneous potentials")]
pub struct Cli {
    /// key = value file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify one triangle and print the report as JSON.
    Classify(ClassifyArgs),
    /// Classify every point of the triangle of normalized masses.
    Sweep(SweepArgs),
    /// Critical side as a function of f.
    RadiusCurve(RadiusArgs),
    /// Compare the closed-form criteria with the numerical spectrum.
    Verify(VerifyArgs),
    /// Integrate the rotating-frame equations from a (perturbed) triangle.
    Integrate(IntegrateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PotentialArgs {
    /// Exponent of the leading term.
    #[arg(long)]
    pub a: f64,
    /// Exponent of the second term (quasihomogeneous, b < a).
    #[arg(long)]
    pub b: Option<f64>,
    /// Triangle side.
    #[arg(long)]
    pub r0: Option<f64>,
}

impl PotentialArgs {
    pub fn spec(&self) -> Result<PotentialSpec> {
        Ok(match self.b {
            None => PotentialSpec::homogeneous(self.a)?,
            Some(b) => PotentialSpec::quasihomogeneous(self.a, b)?,
        })
    }

    /// Side to use: `--r0` for quasihomogeneous potentials (required),
    /// `sqrt 3` for homogeneous ones, whose stability ignores the size.
    fn side(&self, spec: &PotentialSpec) -> Result<f64> {
        match (spec.is_homogeneous(), self.r0) {
            (true, r0) => Ok(r0.unwrap_or(3f64.sqrt())),
            (false, Some(r0)) => Ok(r0),
            (false, None) => Err(CliError::Usage("a quasihomogeneous potential needs --r0".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub masses: Vec<f64>,
    #[command(flatten)]
    pub potential: PotentialArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Lattice points per edge of the mass triangle.
    #[arg(long, default_value_t = 100)]
    pub resolution: usize,
    /// Level curves f = c to write next to the output.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Values of f; defaults to an even spread over the size-dependent band.
    #[arg(long, value_delimiter = ',')]
    pub f_values: Vec<f64>,
    /// Number of default f values.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Also compare integrated growth rates with the spectrum.
    #[arg(long)]
    pub with_dynamics: bool,
    /// Print the summary as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub masses: Vec<f64>,
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Integration length in rotation periods.
    #[arg(long, default_value_t = 10.0)]
    pub periods: f64,
    /// Initial position perturbation relative to the side.
    #[arg(long, default_value_t = 0.0)]
    pub perturbation: f64,
    /// Time step; defaults to a thousandth of the period.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Keep every n-th step.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct OracleSummary {
    classification: Classification,
    margin: f64,
    max_real_part: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct ClassifyOutput {
    masses: Vec<f64>,
    potential: PotentialSpec,
    r0: f64,
    #[serde(flatten)]
    report: StabilityReport,
    /// Classification from the full numerical spectrum.
    oracle: OracleSummary,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Writes to `path`, or to `stdout` when there is none.
fn emit(path: Option<&Path>, stdout: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(p, e))
        }
        None => body(stdout).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn run_classify(args: &ClassifyArgs, tol: f64, out: &mut dyn Write) -> Result<()> {
    let masses = MassVector::new(args.masses.clone())?;
    let spec = args.potential.spec()?;
    let r0 = args.potential.side(&spec)?;
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(CliError::Usage(format!("r0 must be positive, got {r0}")));
    }
    let report = classify(&masses, &spec, r0)?;
    let spectrum = full_spectrum_with_tol(&lagrange_triangle(&masses, &spec, r0)?, tol)?;
    let doc = ClassifyOutput {
        masses: args.masses.clone(),
        potential: spec,
        r0,
        report,
        oracle: OracleSummary {
            classification: spectrum.classification,
            margin: spectrum.margin,
            max_real_part: spectrum.max_real_part,
            tolerance: tol,
        },
    };
    serde_json::to_writer_pretty(&mut *out, &doc).map_err(|e| stdout_err(e.into()))?;
    writeln!(out).map_err(stdout_err)
}

fn run_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let config = SweepConfig {
        grid_resolution: args.resolution,
        potential: args.potential.spec()?,
        r0: args.potential.r0,
        levels: args.levels.clone(),
        output_path: args.out.clone(),
        format: args.format,
    };
    let points = sweep_to_files(&config)?;
    let counts: Vec<String> = label_counts(&points).iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(
        out,
        "{} points -> {}; {}; stable components: {}",
        points.len(),
        args.out.display(),
        counts.join(" "),
        components(&points, "stable").len()
    )
    .map_err(stdout_err)
}

fn run_radius(args: &RadiusArgs, out: &mut dyn Write) -> Result<()> {
    let spec = args.potential.spec()?;
    let f = if args.f_values.is_empty() {
        default_f_values(&spec, args.count)?
    } else {
        args.f_values.clone()
    };
    let rows = radius_curve(&spec, &f)?;
    emit(args.out.as_deref(), out, |w| match args.format {
        Format::Csv => crate::radius::write_csv(&mut { w }, &rows),
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &rows)?;
            writeln!(w)
        }
    })
}

fn run_verify(args: &VerifyArgs, tol: f64, out: &mut dyn Write) -> Result<()> {
    let summary = verify(args.samples, args.seed, tol, args.with_dynamics)?;
    if args.json {
        serde_json::to_writer_pretty(&mut *out, &summary).map_err(|e| stdout_err(e.into()))?;
        writeln!(out).map_err(stdout_err)?;
    } else {
        write!(out, "{}", summary.render()).map_err(stdout_err)?;
    }
    if summary.passed() {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "{} classification mismatches, {} growth rate failures",
            summary.mismatches,
            summary.dynamics.as_ref().map_or(0, |d| d.failures)
        )))
    }
}

fn run_integrate(args: &IntegrateArgs, out: &mut dyn Write) -> Result<()> {
    let masses = MassVector::new(args.masses.clone())?;
    let spec = args.potential.spec()?;
    let re = lagrange_triangle(&masses, &spec, args.potential.side(&spec)?)?;
    let w = re.omega_hat();
    let dt = args.dt.unwrap_or_else(|| default_dt(w));
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CliError::Usage(format!("dt must be positive, got {dt}")));
    }
    if !(args.periods.is_finite() && args.periods > 0.0) {
        return Err(CliError::Usage(format!("periods must be positive, got {}", args.periods)));
    }
    let steps = (args.periods * period(&re) / dt).ceil() as usize;
    let start: PhaseState = perturbed_equilibrium(&re, args.perturbation);
    let traj = integrate(&start, &masses, &spec, w, dt, steps)?;
    emit(args.out.as_deref(), out, |w| write_trajectory_csv(&mut { w }, &traj, args.stride))?;
    if let Some(c) = traj.collision {
        eprintln!("collision of bodies {} and {} at step {}", c.j + 1, c.k + 1, c.step);
    }
    Ok(())
}

/// Classification tolerance from the `RELEQ_TOL` value, if set.
pub fn tolerance(value: Option<&str>) -> Result<f64> {
    match value {
        None => Ok(releq::stability::IMAGINARY_TOLERANCE),
        Some(s) => match s.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
            _ => Err(CliError::Usage(format!("RELEQ_TOL must be a positive number, got {s:?}"))),
        },
    }
}

pub fn run(cli: &Cli, tol: f64, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Classify(a) => run_classify(a, tol, out),
        Command::Sweep(a) => run_sweep(a, out),
        Command::RadiusCurve(a) => run_radius(a, out),
        Command::Verify(a) => run_verify(a, tol, out),
        Command::Integrate(a) => run_integrate(a, out),
    }
}
