//! `dsff-lab`: sample spectra, estimate the DSFF, evaluate theory, compare
//! and verify.
//!
//! Exit codes: 0 success, 1 numerical or verification failure, 2 usage
//! error, 3 I/O or format error.

pub mod error;
pub mod plot;
pub mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dsff_core::ensembles::EnsembleDescriptor;
use dsff_core::spectra::{sample_spectra, SpectraError};
use dsff_core::theory::timescales;
use dsff_core::verify::{run_all, run_suite, Suite, VerifyConfig};
use dsff_core::{
    build_tau_grid, dsff_grid, ComplexTime, EnsembleSpec, EntryDistribution, Field, Spacing, SpectrumSet, Symmetry,
    Theory, TheoryError,
};

pub use error::CliError;
use table::{read_csv, write_csv, write_json, CompareRow, EstimateRow, TheoryRow};

/// Default directory for `sample` output when `--out` is not given.
pub const CACHE_DIR_ENV: &str = "DSFF_LAB_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "dsff-lab", version, about = "Dissipative spectral form factor laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample matrices and cache their spectra.
    Sample(SampleArgs),
    /// Estimate the DSFF from a spectrum cache.
    Estimate(EstimateArgs),
    /// Evaluate an analytic prediction on a τ grid.
    Theory(TheoryArgs),
    /// Merge an estimate with a theory table and plot them.
    Compare(CompareArgs),
    /// Run the deterministic invariant suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DistArg {
    Gaussian,
    Rademacher,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpacingArg {
    Log,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    /// `e² + v/N²` with all terms.
    Theorem,
    /// Large-|τ| form.
    Simplified,
    /// Complex Ginibre with contact, disconnected and connected parts.
    GinibreExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Bessel,
    Quadrature,
    Theory,
    Estimator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub field: FieldArg,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub dist: DistArg,
    /// Matrix dimension N.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Number of matrices M.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; does not affect the output.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Cache file. Defaults to a generated name under $DSFF_LAB_CACHE_DIR.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Angle of τ in the complex plane.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Smallest |τ| (default 0.1).
    #[arg(long)]
    pub tau_min: Option<f64>,
    /// Largest |τ| (default twice the Heisenberg time √N).
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long, default_value_t = 120, value_parser = clap::value_parser!(u64).range(1..))]
    pub points: u64,
    #[arg(long, value_enum, default_value = "log")]
    pub spacing: SpacingArg,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub cache: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct TheoryArgs {
    #[arg(long, value_enum, default_value = "theorem")]
    pub model: ModelArg,
    /// 1 for real entries, 2 for complex.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub beta: u8,
    /// Fourth cumulant of the entry law.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kappa4: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub estimate: PathBuf,
    #[arg(long)]
    pub theory: PathBuf,
    /// Merged CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG chart.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Also plot the connected parts.
    #[arg(long)]
    pub subtract_disconnected: bool,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    /// Quadrature grid as a multiple of the standard 400×512, e.g. `2x`.
    #[arg(long, default_value = "1x", value_parser = parse_grid_scale)]
    pub grid: usize,
    /// JSON report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_grid_scale(s: &str) -> Result<usize, String> {
    s.strip_suffix('x')
        .unwrap_or(s)
        .parse::<usize>()
        .ok()
        .filter(|k| *k >= 1)
        .ok_or_else(|| format!("expected a positive multiple such as 1x or 2x, got '{s}'"))
}

/// Grid parameters after defaults are applied.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridConfig {
    pub theta: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: u64,
    pub spacing: SpacingArg,
}

/// Everything needed to reproduce an output file. Worker counts are left
/// out since they do not change results.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Estimate {
        cache: String,
        ensemble: EnsembleDescriptor,
        samples: usize,
        seed: u64,
        grid: GridConfig,
    },
    Theory {
        model: ModelArg,
        beta: u8,
        kappa4: f64,
        n: u64,
        grid: GridConfig,
    },
    Compare {
        estimate: String,
        theory: String,
        estimate_config: serde_json::Value,
        theory_config: serde_json::Value,
    },
    Verify {
        suite: String,
        grid_scale: usize,
    },
}

#[derive(Serialize)]
struct Provenance<'a> {
    artifact: &'static str,
    version: &'static str,
    run: &'a RunConfig,
}

impl RunConfig {
    fn provenance(&self) -> Provenance<'_> {
        Provenance {
            artifact: "dsff-lab",
            version: env!("CARGO_PKG_VERSION"),
            run: self,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Theory(a) => cmd_theory(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn workers(requested: Option<usize>) -> usize {
    requested
        .filter(|w| *w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn ensemble(field: FieldArg, dist: DistArg, n: u64) -> EnsembleSpec {
    let field = match field {
        FieldArg::Real => Field::Real,
        FieldArg::Complex => Field::Complex,
    };
    let dist = match dist {
        DistArg::Gaussian => EntryDistribution::Gaussian,
        DistArg::Rademacher => EntryDistribution::Rademacher,
        DistArg::Uniform => EntryDistribution::Uniform,
    };
    EnsembleSpec::new(field, dist, n as usize)
}

fn spectra_error(path: &Path, e: SpectraError) -> CliError {
    match e {
        SpectraError::Io(source) => CliError::io(path, source),
        SpectraError::NoConvergence { .. } => CliError::Numerical(e.to_string()),
        other => CliError::format(path, other),
    }
}

/// Writes to `path`, or to standard output.
fn emit(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut w = BufWriter::new(file);
            write(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn emit_table<R: Serialize>(output: &OutputArgs, config: &RunConfig, rows: &[R]) -> Result<(), CliError> {
    let provenance = config.provenance();
    emit(output.out.as_deref(), |w| match output.format {
        FormatArg::Csv => write_csv(w, &provenance, rows),
        FormatArg::Json => write_json(w, &provenance, rows),
    })
}

fn resolve_grid(args: &GridArgs, n: u64) -> Result<(GridConfig, Vec<ComplexTime>), CliError> {
    let config = GridConfig {
        theta: args.theta,
        tau_min: args.tau_min.unwrap_or(0.1),
        tau_max: args.tau_max.unwrap_or_else(|| 2.0 * timescales(n as usize).tau_hei),
        points: args.points,
        spacing: args.spacing,
    };
    let spacing = match config.spacing {
        SpacingArg::Log => Spacing::Log,
        SpacingArg::Linear => Spacing::Linear,
    };
    let taus = build_tau_grid(config.theta, config.tau_min, config.tau_max, config.points as usize, spacing)
        .map_err(|e| CliError::Usage(format!("--tau-min/--tau-max/--points: {e}")))?;
    Ok((config, taus))
}

fn cmd_sample(a: SampleArgs) -> Result<(), CliError> {
    let spec = ensemble(a.field, a.dist, a.n);
    let out = match a.out {
        Some(p) => p,
        None => match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) => Path::new(&dir).join(format!(
                "{}-{}-n{}-m{}-seed{}.bin",
                format!("{:?}", spec.field).to_lowercase(),
                format!("{:?}", spec.distribution).to_lowercase(),
                a.n,
                a.samples,
                a.seed
            )),
            None => {
                return Err(CliError::Usage(format!(
                    "--out is required when {CACHE_DIR_ENV} is not set"
                )))
            }
        },
    };
    let set = sample_spectra(&spec, a.samples as usize, a.seed, workers(a.workers))
        .map_err(|e| spectra_error(&out, e))?;
    set.save(&out).map_err(|e| spectra_error(&out, e))?;
    eprintln!(
        "wrote {} spectra of {} eigenvalues to {}",
        set.m(),
        set.n(),
        out.display()
    );
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> Result<(), CliError> {
    let set = SpectrumSet::load(&a.cache).map_err(|e| spectra_error(&a.cache, e))?;
    let (grid, taus) = resolve_grid(&a.grid, set.n() as u64)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers(a.workers))
        .build()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    let estimates = pool
        .install(|| dsff_grid(&set, &taus))
        .map_err(|e| CliError::format(&a.cache, e))?;
    let rows: Vec<EstimateRow> = estimates
        .iter()
        .map(|e| EstimateRow {
            theta: grid.theta,
            abs_tau: e.tau.abs_tau(),
            t: e.tau.t,
            s: e.tau.s,
            k_mean: e.k_mean,
            k_stderr: e.k_stderr,
            disconnected_unbiased: e.disconnected_unbiased,
            connected: e.connected,
            contact: e.contact,
            m: e.m,
            n: e.n,
        })
        .collect();
    let config = RunConfig::Estimate {
        cache: a.cache.to_string_lossy().into_owned(),
        ensemble: set.spec.descriptor(),
        samples: set.m(),
        seed: set.master_seed,
        grid,
    };
    emit_table(&a.output, &config, &rows)
}

fn theory_row(
    theory: &Theory,
    model: ModelArg,
    symmetry: Symmetry,
    kappa4: f64,
    n: usize,
    theta: f64,
    tau: ComplexTime,
) -> Result<TheoryRow, TheoryError> {
    let mut row = TheoryRow {
        theta,
        abs_tau: tau.abs_tau(),
        t: tau.t,
        s: tau.s,
        k_total: 0.0,
        contact: None,
        disconnected: None,
        connected: None,
        e_value: None,
        v_value: None,
        e_leading: None,
        e_laplacian: None,
        e_kappa4: None,
        e_real_axis: None,
        v_gradient: None,
        v_series: None,
        v_kappa4: None,
        v_real_ramp: None,
        validity_warning: tau.abs_tau() > dsff_core::theory::validity_limit(n),
    };
    match model {
        ModelArg::Theorem => {
            let p = theory.dsff_theory(tau, n, kappa4, symmetry)?;
            row.k_total = p.k_total;
            row.disconnected = Some(p.disconnected);
            row.connected = Some(p.connected);
            row.e_value = Some(p.e_value);
            row.v_value = Some(p.v_value);
            row.e_leading = Some(p.expectation_terms.leading);
            row.e_laplacian = Some(p.expectation_terms.laplacian);
            row.e_kappa4 = Some(p.expectation_terms.kappa4);
            row.e_real_axis = Some(p.expectation_terms.real_axis);
            row.v_gradient = Some(p.variance_terms.gradient);
            row.v_series = Some(p.variance_terms.series);
            row.v_kappa4 = Some(p.variance_terms.kappa4);
            row.v_real_ramp = Some(p.variance_terms.real_ramp);
        }
        ModelArg::Simplified => {
            row.k_total = theory.dsff_simplified(tau, n, symmetry)?;
        }
        ModelArg::GinibreExact => {
            let g = theory.ginibre_exact_dsff(tau, n)?;
            row.k_total = g.total();
            row.contact = Some(g.contact);
            row.disconnected = Some(g.disconnected);
            row.connected = Some(g.connected);
        }
    }
    Ok(row)
}

fn cmd_theory(a: TheoryArgs) -> Result<(), CliError> {
    let (grid, taus) = resolve_grid(&a.grid, a.n)?;
    let symmetry = Symmetry::from_beta(a.beta).expect("clap restricts beta to 1 or 2");
    match a.model {
        ModelArg::Simplified if taus.iter().any(|t| t.abs_tau() == 0.0) => {
            return Err(CliError::Usage(
                "the simplified model needs |τ| > 0 but the grid contains τ = 0".into(),
            ))
        }
        ModelArg::GinibreExact if symmetry == Symmetry::Real => {
            return Err(CliError::Usage("--model ginibre-exact describes complex entries; use --beta 2".into()))
        }
        _ => {}
    }
    let theory = Theory::default();
    let n = a.n as usize;
    let rows = taus
        .iter()
        .map(|&tau| theory_row(&theory, a.model, symmetry, a.kappa4, n, grid.theta, tau))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let warned = rows.iter().filter(|r| r.validity_warning).count();
    if warned > 0 && a.model == ModelArg::Theorem {
        eprintln!(
            "note: {warned} of {} points have |τ| > N^(2/7) = {:.3}, outside the proven range",
            rows.len(),
            dsff_core::theory::validity_limit(n)
        );
    }
    let config = RunConfig::Theory {
        model: a.model,
        beta: a.beta,
        kappa4: a.kappa4,
        n: a.n,
        grid,
    };
    emit_table(&a.output, &config, &rows)
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Joins an estimate and a theory table row by row.
pub fn merge(estimate: &[EstimateRow], theory: &[TheoryRow], theory_path: &Path) -> Result<Vec<CompareRow>, CliError> {
    if estimate.len() != theory.len() {
        return Err(CliError::format(
            theory_path,
            format!("grid mismatch: estimate has {} rows, theory has {}", estimate.len(), theory.len()),
        ));
    }
    estimate
        .iter()
        .zip(theory)
        .enumerate()
        .map(|(k, (e, t))| {
            if !(same(e.theta, t.theta) && same(e.abs_tau, t.abs_tau)) {
                return Err(CliError::format(
                    theory_path,
                    format!(
                        "grid mismatch at row {}: estimate (theta={}, abs_tau={}), theory (theta={}, abs_tau={})",
                        k + 1,
                        e.theta,
                        e.abs_tau,
                        t.theta,
                        t.abs_tau
                    ),
                ));
            }
            Ok(CompareRow {
                theta: e.theta,
                abs_tau: e.abs_tau,
                t: e.t,
                s: e.s,
                k_mean: e.k_mean,
                k_stderr: e.k_stderr,
                k_total: t.k_total,
                z: e.k_stderr.filter(|se| *se > 0.0).map(|se| (e.k_mean - t.k_total) / se),
                connected: e.connected,
                theory_connected: t.disconnected.map(|d| t.k_total - d),
            })
        })
        .collect()
}

fn cmd_compare(a: CompareArgs) -> Result<(), CliError> {
    let (estimate_config, estimate) = read_csv::<EstimateRow>(&a.estimate)?;
    let (theory_config, theory) = read_csv::<TheoryRow>(&a.theory)?;
    let rows = merge(&estimate, &theory, &a.theory)?;
    let config = RunConfig::Compare {
        estimate: a.estimate.to_string_lossy().into_owned(),
        theory: a.theory.to_string_lossy().into_owned(),
        estimate_config,
        theory_config,
    };
    let provenance = config.provenance();
    emit(a.out.as_deref(), |w| write_csv(w, &provenance, &rows))?;
    if let Some(plot_path) = &a.plot {
        let title = a.title.clone().unwrap_or_else(|| "DSFF: Monte Carlo vs theory".into());
        let svg = plot::render(&rows, &title, a.subtract_disconnected);
        std::fs::write(plot_path, svg).map_err(|e| CliError::io(plot_path, e))?;
    }
    let scored: Vec<f64> = rows.iter().filter_map(|r| r.z).collect();
    let within = scored.iter().filter(|z| z.abs() <= 3.0).count();
    if !scored.is_empty() {
        eprintln!(
            "{} rows, {} with a standard error; |z| ≤ 3 for {} ({:.1}%)",
            rows.len(),
            scored.len(),
            within,
            100.0 * within as f64 / scored.len() as f64
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema: &'static str,
    config: Provenance<'a>,
    passed: bool,
    checks: Vec<dsff_core::verify::InvariantCheck>,
}

fn cmd_verify(a: VerifyArgs) -> Result<(), CliError> {
    let verify_config =
        VerifyConfig::with_grid_scale(a.grid).map_err(|e| CliError::Usage(format!("--grid: {e}")))?;
    let (name, checks) = match a.suite {
        SuiteArg::All => ("all", run_all(&verify_config)),
        SuiteArg::Bessel => ("bessel", run_suite(Suite::Bessel, &verify_config)),
        SuiteArg::Quadrature => ("quadrature", run_suite(Suite::Quadrature, &verify_config)),
        SuiteArg::Theory => ("theory", run_suite(Suite::Theory, &verify_config)),
        SuiteArg::Estimator => ("estimator", run_suite(Suite::Estimator, &verify_config)),
    };
    let passed = checks.iter().all(|c| c.passed);
    let failed = checks.iter().filter(|c| !c.passed).count();
    let total = checks.len();
    let config = RunConfig::Verify {
        suite: name.into(),
        grid_scale: a.grid,
    };
    let report = VerifyReport {
        schema: table::SCHEMA,
        config: config.provenance(),
        passed,
        checks,
    };
    emit(a.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)
    })?;
    if passed {
        eprintln!("{total} checks passed");
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{failed} of {total} checks failed")))
    }
}
