//! Command-line driver behind the `dhs` binary.
//!
//! Exit codes: 0 success, 1 an inequality or identity was violated, 2 usage
//! or configuration error, 3 eigensolver failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{
    evaluate_suite, reports_to_csv, reports_to_json, rhs_exact_all, rhs_geometric_all, BoundReport, RhsMode,
    Tolerance,
};
use crate::complex::{build_complex, WeightedComplex};
use crate::error::Error;
use crate::manifold::{mesh_backend, round_sphere, shrinker_residual, BackendKind, EmbeddedMesh, GeometryBackend};
use crate::operator_identities::run_trials;
use crate::spectrum::{
    analytic_sphere_spectrum, coordinate_eigenfunction_check, solve_hodge, SolverOptions, Spectrum, DEFAULT_SEED,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

const DEFAULT_MESH_TOL: f64 = 0.05;

#[derive(Parser, Debug)]
#[command(name = "dhs", version, about = "Drift Hodge Laplacian spectra and universal eigenvalue inequality checks")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the smallest eigenvalues per form degree.
    Spectrum(SpectrumArgs),
    /// Evaluate the inequality suite and report slack per row.
    Bounds(BoundsArgs),
    /// Spectra, inequality suite and geometric diagnostics in one report.
    Verify(BoundsArgs),
    /// Randomized checks of the abstract commutator identities.
    Abstract(AbstractArgs),
}

#[derive(Args, Debug, Clone)]
struct GeometryArgs {
    /// `sphere:m=<int>[:res=<int>][:radius=<float>]`, `circle[:res=<int>]` or `mesh:<path>`.
    #[arg(long, conflicts_with = "mesh", required_unless_present = "mesh")]
    builtin: Option<String>,
    /// OFF/OBJ surface or polyline file.
    #[arg(long)]
    mesh: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SolveArgs {
    /// Form degrees, comma separated. Defaults to every available degree.
    #[arg(long, value_delimiter = ',')]
    p: Vec<usize>,
    /// Number of eigenvalues per degree.
    #[arg(long)]
    count: Option<usize>,
    /// Discrete eigensolver or closed-form sphere spectrum.
    #[arg(long = "spectrum", value_enum, default_value_t = SpectrumSource::Discrete)]
    source: SpectrumSource,
    /// Seed for the iterative solver; falls back to `DHS_SEED`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Relative eigen-residual target.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to a file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SpectrumArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct BoundsArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    out: OutputArgs,
    /// Largest k (and i) evaluated.
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Relative tolerance for discrete spectra; estimated from the
    /// closed-form spectrum for builtin spheres and circles.
    #[arg(long)]
    mesh_tol: Option<f64>,
    /// Multiply eigenvalue `i` (1-based) by a factor before evaluating, as
    /// `i:factor`. Used to inject violations.
    #[arg(long, value_name = "I:FACTOR")]
    scale_eigenvalue: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct AbstractArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest matrix size.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(2..))]
    n_max: u64,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SpectrumSource {
    Discrete,
    Analytic,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    #[value(alias = "exact-integral")]
    Exact,
    #[value(alias = "geometric-max")]
    Geometric,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver { .. } => EXIT_SOLVER,
            Error::Infeasible(_) | Error::IdentityViolation(_) => EXIT_VIOLATION,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parse arguments, run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    let threads = match &command {
        Command::Spectrum(a) => a.solve.threads,
        Command::Bounds(a) | Command::Verify(a) => a.solve.threads,
        Command::Abstract(a) => a.threads,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Spectrum(a) => cmd_spectrum(&a),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Abstract(a) => cmd_abstract(&a),
    })
}

fn resolve_seed(seed: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var("DHS_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("DHS_SEED must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// A parsed geometry with what the commands need from it.
struct Geometry {
    label: String,
    backend: GeometryBackend,
    complex: Option<WeightedComplex>,
    /// Set when the closed-form spectrum applies (`S^m(√m)` builtins).
    oracle_m: Option<usize>,
}

impl Geometry {
    fn m(&self) -> usize {
        self.backend.intrinsic_dim()
    }
}

fn load_geometry(args: &GeometryArgs) -> Result<Geometry, Failure> {
    if let Some(path) = &args.mesh {
        return load_mesh(path.clone(), format!("mesh:{}", path.display()));
    }
    let spec = args.builtin.as_deref().expect("clap requires one source");
    let mut parts = spec.split(':');
    let head = parts.next().unwrap_or_default();
    match head {
        "mesh" => {
            let path = spec.strip_prefix("mesh:").unwrap_or_default();
            if path.is_empty() {
                return Err(usage("mesh builtin needs a path, as mesh:<path>"));
            }
            load_mesh(PathBuf::from(path), spec.to_string())
        }
        "sphere" | "circle" => {
            let mut m = if head == "circle" { Some(1) } else { None };
            let mut res = None;
            let mut radius = None;
            for kv in parts {
                let (key, value) = kv
                    .split_once('=')
                    .ok_or_else(|| usage(format!("expected key=value in {spec:?}, got {kv:?}")))?;
                let bad = || usage(format!("invalid value for {key} in {spec:?}"));
                match key {
                    "m" if head == "sphere" => m = Some(value.parse().map_err(|_| bad())?),
                    "res" => res = Some(value.parse().map_err(|_| bad())?),
                    "radius" => radius = Some(value.parse::<f64>().map_err(|_| bad())?),
                    _ => return Err(usage(format!("unknown option {key:?} in {spec:?}"))),
                }
            }
            let m: usize = m.ok_or_else(|| usage("sphere builtin needs m=<int>"))?;
            if m == 0 {
                return Err(usage("m must be at least 1"));
            }
            let res = res.unwrap_or(match m {
                1 => 64,
                2 => 4,
                _ => 8,
            });
            let shrinker = (m as f64).sqrt();
            let r = radius.unwrap_or(shrinker);
            let backend = round_sphere(m, r, res)?;
            let complex = if backend.cells().is_some() {
                Some(build_complex(&backend)?)
            } else {
                None
            };
            Ok(Geometry {
                label: spec.to_string(),
                backend,
                complex,
                oracle_m: (r == shrinker).then_some(m),
            })
        }
        _ => Err(usage(format!("unknown builtin {spec:?}"))),
    }
}

fn load_mesh(path: PathBuf, label: String) -> Result<Geometry, Failure> {
    let mesh = EmbeddedMesh::from_path(&path)?;
    let backend = mesh_backend(&mesh)?;
    let complex = Some(build_complex(&backend)?);
    Ok(Geometry {
        label,
        backend,
        complex,
        oracle_m: None,
    })
}

fn degrees(geometry: &Geometry, solve: &SolveArgs) -> Result<Vec<usize>, Failure> {
    let m = geometry.m();
    let ps: Vec<usize> = if !solve.p.is_empty() {
        solve.p.clone()
    } else if solve.source == SpectrumSource::Analytic && m > 1 {
        vec![0, m]
    } else {
        (0..=m).collect()
    };
    if let Some(&p) = ps.iter().find(|&&p| p > m) {
        return Err(Error::Degree { degree: p, max: m }.into());
    }
    Ok(ps)
}

fn compute_spectrum(geometry: &Geometry, solve: &SolveArgs, p: usize, count: usize) -> Result<Spectrum, Failure> {
    match solve.source {
        SpectrumSource::Analytic => {
            let m = geometry.oracle_m.ok_or_else(|| {
                usage(format!(
                    "no closed-form spectrum for {}; only S^m(√m) builtins have one",
                    geometry.label
                ))
            })?;
            Ok(analytic_sphere_spectrum(m, p, count)?)
        }
        SpectrumSource::Discrete => {
            let complex = geometry.complex.as_ref().ok_or_else(|| {
                usage(format!(
                    "{} has no cell complex; pass --spectrum analytic",
                    geometry.label
                ))
            })?;
            let opts = SolverOptions {
                tol: solve.tol,
                seed: resolve_seed(solve.seed)?,
                ..SolverOptions::default()
            };
            Ok(solve_hodge(&complex.hodge_laplacian(p)?, count, &opts)?)
        }
    }
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<i32, Failure> {
    let geometry = load_geometry(&args.geometry)?;
    let count = args.solve.count.unwrap_or(10);
    let spectra = degrees(&geometry, &args.solve)?
        .into_iter()
        .map(|p| compute_spectrum(&geometry, &args.solve, p, count))
        .collect::<Result<Vec<_>, _>>()?;
    let text = serde_json::to_string_pretty(&spectra).expect("spectra serialize") + "\n";
    emit(&text, args.output.as_ref())?;
    Ok(EXIT_OK)
}

fn parse_scaling(spec: &str) -> Result<(usize, f64), Failure> {
    let bad = || usage(format!("--scale-eigenvalue expects i:factor, got {spec:?}"));
    let (i, f) = spec.split_once(':').ok_or_else(bad)?;
    let i: usize = i.parse().map_err(|_| bad())?;
    let f: f64 = f.parse().map_err(|_| bad())?;
    if i == 0 {
        return Err(bad());
    }
    Ok((i, f))
}

/// Relative error of the discrete `p = 0` spectrum against the closed form,
/// over the nonzero eigenvalues.
fn estimate_mesh_tol(geometry: &Geometry, solve: &SolveArgs, count: usize) -> Result<f64, Failure> {
    let Some(m) = geometry.oracle_m else {
        return Ok(DEFAULT_MESH_TOL);
    };
    let discrete = SolveArgs {
        source: SpectrumSource::Discrete,
        ..solve.clone()
    };
    let computed = compute_spectrum(geometry, &discrete, 0, count)?;
    let exact = analytic_sphere_spectrum(m, 0, count)?;
    Ok(computed
        .eigenvalues
        .iter()
        .zip(&exact.eigenvalues)
        .filter(|(_, e)| **e > 0.0)
        .map(|(c, e)| (c - e).abs() / e)
        .fold(0.0, f64::max))
}

struct SuiteRun {
    spectra: Vec<Spectrum>,
    reports: Vec<BoundReport>,
    tolerance: Option<f64>,
    skipped: Vec<String>,
}

fn run_suite(geometry: &Geometry, args: &BoundsArgs, modes: &[Mode], strict: bool) -> Result<SuiteRun, Failure> {
    let m = geometry.m();
    let count = args.solve.count.unwrap_or(args.k_max + m + 1);
    if count < args.k_max + 1 {
        return Err(usage(format!(
            "--count {count} is too small for --k-max {}; need at least {}",
            args.k_max,
            args.k_max + 1
        )));
    }
    let scaling = args.scale_eigenvalue.as_deref().map(parse_scaling).transpose()?;
    let tolerance = match args.solve.source {
        SpectrumSource::Analytic => None,
        SpectrumSource::Discrete => Some(match args.mesh_tol {
            Some(t) => t,
            None => estimate_mesh_tol(geometry, &args.solve, count)?,
        }),
    };
    let policy = tolerance.map_or(Tolerance::Analytic, Tolerance::Mesh);

    let mut spectra = Vec::new();
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for p in degrees(geometry, &args.solve)? {
        let mut spectrum = compute_spectrum(geometry, &args.solve, p, count)?;
        if let Some((i, factor)) = scaling {
            if i > spectrum.len() {
                return Err(usage(format!("cannot scale eigenvalue {i} of {}", spectrum.len())));
            }
            spectrum.eigenvalues[i - 1] *= factor;
        }
        let k = spectrum.len().min(args.k_max.max(1) + m).min(spectrum.len());
        for &mode in modes {
            let rhs = match mode {
                Mode::Exact => rhs_exact_all(&spectrum, &geometry.backend, geometry.complex.as_ref(), k),
                Mode::Geometric => rhs_geometric_all(&spectrum, &geometry.backend, k),
            };
            let rhs = match rhs {
                Ok(r) => r,
                Err(e @ Error::Capability(_)) if !strict => {
                    skipped.push(format!("p = {p}, {}: {e}", mode_name(mode)));
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            reports.extend(evaluate_suite(&spectrum, &rhs, args.k_max, policy)?);
        }
        spectra.push(spectrum);
    }
    Ok(SuiteRun {
        spectra,
        reports,
        tolerance,
        skipped,
    })
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => RhsMode::ExactIntegral.as_str(),
        Mode::Geometric => RhsMode::GeometricMax.as_str(),
    }
}

fn cmd_bounds(args: &BoundsArgs) -> Result<i32, Failure> {
    let geometry = load_geometry(&args.geometry)?;
    let run = run_suite(&geometry, args, &[args.mode], true)?;
    let text = match args.out.format {
        Format::Json => reports_to_json(&run.reports) + "\n",
        Format::Csv => reports_to_csv(&run.reports)?,
    };
    emit(&text, args.out.output.as_ref())?;
    Ok(if run.reports.iter().all(|r| r.pass) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

#[derive(Serialize)]
struct GeometrySummary {
    source: String,
    kind: BackendKind,
    intrinsic_dim: usize,
    ambient_dim: usize,
    samples: usize,
    weighted_volume: f64,
}

#[derive(Serialize)]
struct Diagnostics {
    shrinker_residual: f64,
    coordinate_eigenfunction_residual: Option<f64>,
    exterior_derivative_squares_to_zero: Option<bool>,
    max_eigen_residual: f64,
    max_orthonormality_error: f64,
    mesh_tolerance: Option<f64>,
}

#[derive(Serialize)]
struct VerifyReport {
    geometry: GeometrySummary,
    seed: u64,
    diagnostics: Diagnostics,
    spectra: Vec<Spectrum>,
    bounds: Vec<BoundReport>,
    skipped: Vec<String>,
    violations: usize,
    pass: bool,
}

fn cmd_verify(args: &BoundsArgs) -> Result<i32, Failure> {
    let geometry = load_geometry(&args.geometry)?;
    let run = run_suite(&geometry, args, &[Mode::Exact, Mode::Geometric], false)?;

    let mut orthonormality: f64 = 0.0;
    if let Some(c) = &geometry.complex {
        for s in run.spectra.iter().filter(|s| s.has_eigenforms()) {
            for (a, u) in s.eigenforms.iter().enumerate() {
                for (b, v) in s.eigenforms.iter().enumerate().skip(a) {
                    let target = if a == b { 1.0 } else { 0.0 };
                    orthonormality = orthonormality.max((c.inner(s.degree, u, v)? - target).abs());
                }
            }
        }
    }
    let dd_zero = match &geometry.complex {
        Some(c) if c.degrees() >= 2 => Some(c.d(1)?.matmul(c.d(0)?)?.is_zero()),
        Some(_) => Some(true),
        None => None,
    };
    let diagnostics = Diagnostics {
        shrinker_residual: shrinker_residual(&geometry.backend),
        coordinate_eigenfunction_residual: geometry
            .complex
            .as_ref()
            .map(coordinate_eigenfunction_check)
            .transpose()?,
        exterior_derivative_squares_to_zero: dd_zero,
        max_eigen_residual: run
            .spectra
            .iter()
            .flat_map(|s| s.residuals.iter().copied())
            .fold(0.0, f64::max),
        max_orthonormality_error: orthonormality,
        mesh_tolerance: run.tolerance,
    };
    let violations = run.reports.iter().filter(|r| !r.pass).count();
    let report = VerifyReport {
        geometry: GeometrySummary {
            source: geometry.label.clone(),
            kind: geometry.backend.kind(),
            intrinsic_dim: geometry.m(),
            ambient_dim: geometry.backend.ambient_dim(),
            samples: geometry.backend.sample_points().len(),
            weighted_volume: geometry.backend.weighted_volume(),
        },
        seed: resolve_seed(args.solve.seed)?,
        diagnostics,
        spectra: run.spectra,
        bounds: run.reports,
        skipped: run.skipped,
        violations,
        pass: violations == 0,
    };
    let text = match args.out.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Csv => reports_to_csv(&report.bounds)?,
    };
    emit(&text, args.out.output.as_ref())?;
    Ok(if report.pass { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_abstract(args: &AbstractArgs) -> Result<i32, Failure> {
    let seed = resolve_seed(args.seed)?;
    let summary = run_trials(seed, args.trials as usize, args.n_max as usize)?;
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    let _ = writeln!(text);
    emit(&text, args.output.as_ref())?;
    Ok(if summary.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> i32 {
        run(std::iter::once("dhs").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(code(&["abstract", "--trials", "0"]), EXIT_USAGE);
        assert_eq!(code(&["spectrum", "--builtin", "torus"]), EXIT_USAGE);
        assert_eq!(code(&["spectrum", "--builtin", "sphere:m=3", "--p", "0"]), EXIT_USAGE);
        assert_eq!(code(&["spectrum", "--builtin", "sphere:m=2", "--p", "1", "--spectrum", "analytic"]), EXIT_USAGE);
    }

    #[test]
    fn scaling_parser() {
        assert_eq!(parse_scaling("5:2").unwrap(), (5, 2.0));
        assert!(parse_scaling("0:2").is_err());
        assert!(parse_scaling("x").is_err());
    }
}
