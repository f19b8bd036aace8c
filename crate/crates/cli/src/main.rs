//! `magnodrag` command-line front end.
//!
//! Exit codes:
//!   0  success
//!   1  I/O failure or internal error
//!   2  config or usage error
//!   3  no physical steady-state root
//!   4  numerical failure (residual, singular response, too many failed rows)
//!   5  input table schema mismatch

mod manifest;
mod output;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use magnodrag::config::{ConfigError, ConfigFile, Resolved};
use magnodrag::presets;
use magnodrag::steady::{self, BranchPolicy, SteadyError};
use magnodrag::sweep::{
    self, extract_features, Axis, Curve, FeatureError, Override, SweepError, SweepSpec,
    TableIoError,
};
use magnodrag::DragQuadrature;

use manifest::{ConfigDigest, RunManifest};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    NoRoot(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::NoRoot(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Schema(_) => 5,
        }
    }
}

impl From<SteadyError> for CliError {
    fn from(e: SteadyError) -> Self {
        match e {
            SteadyError::NoPhysicalRoot => CliError::NoRoot(e.to_string()),
            SteadyError::InvalidDrive(_) => CliError::Usage(e.to_string()),
            SteadyError::ResidualTooLarge { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::InvalidSpec(_) | SweepError::Params(_) => CliError::Usage(e.to_string()),
            SweepError::TooManyFailures { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TableIoError> for CliError {
    fn from(e: TableIoError) -> Self {
        match e {
            TableIoError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Schema(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "magnodrag", version, about = "Cavity magnomechanics: steady state, probe spectra and light drag")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the steady state and print the root table.
    Steady {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = BranchArg::Lowest)]
        branch: BranchArg,
        /// Print the manifest and roots as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run a sweep or a figure preset and write a CSV table.
    Sweep(SweepArgs),
    /// Extract spectral features from a sweep CSV.
    Features {
        csv: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Figure preset id, e.g. 2b.
    #[arg(long, conflicts_with_all = ["axis", "range", "samples"])]
    figure: Option<String>,
    #[arg(long, value_enum, required_unless_present = "figure")]
    axis: Option<AxisArg>,
    /// Axis range in axis units: σ/ω_b, m/s, Γ/ω_b or W.
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
    range: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also write a gnuplot data file and plot script next to the CSV.
    #[arg(long)]
    gnuplot: bool,
    #[arg(long, value_enum, default_value_t = BranchArg::Lowest)]
    branch: BranchArg,
    #[arg(long, value_enum, default_value_t = QuadratureArg::Dispersive)]
    quadrature: QuadratureArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Sigma,
    Velocity,
    #[value(name = "Gamma")]
    Gamma,
    Power,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Sigma => Axis::Sigma,
            AxisArg::Velocity => Axis::Velocity,
            AxisArg::Gamma => Axis::Coupling,
            AxisArg::Power => Axis::Power,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BranchArg {
    Lowest,
    Highest,
    Continuation,
}

impl From<BranchArg> for BranchPolicy {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Lowest => BranchPolicy::Lowest,
            BranchArg::Highest => BranchPolicy::Highest,
            BranchArg::Continuation => BranchPolicy::Continuation { previous: None },
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QuadratureArg {
    Dispersive,
    Real,
}

impl From<QuadratureArg> for DragQuadrature {
    fn from(q: QuadratureArg) -> Self {
        match q {
            QuadratureArg::Dispersive => DragQuadrature::Dispersive,
            QuadratureArg::Real => DragQuadrature::Real,
        }
    }
}

fn load_config(path: &Path) -> Result<(Resolved, ConfigDigest), CliError> {
    let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| ConfigError::Syntax {
        line: 0,
        column: 0,
        message: "config is not valid UTF-8".into(),
    })?;
    let resolved = ConfigFile::parse(&text)?.resolve()?;
    Ok((resolved, ConfigDigest::of(path, &bytes)))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(var) = std::env::var("MAGNODRAG_THREADS") else {
        return Ok(());
    };
    let n: usize = var
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("MAGNODRAG_THREADS must be a positive integer, got `{var}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))
}

/// Print to standard output; a closed pipe is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{}", text.trim_end()).and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
        _ => Ok(()),
    }
}

fn cmd_steady(config: &Path, branch: BranchArg, json: bool) -> Result<(), CliError> {
    let (resolved, digest) = load_config(config)?;
    let p = &resolved.params;
    let eps = p
        .epsilon_m()
        .map_err(|source| ConfigError::Params { field: "drive", source })?;
    let state = steady::solve_steady(p, eps, branch.into())?;
    let manifest = RunManifest::new(&resolved, &digest, None, &[])?;
    if json {
        let doc = serde_json::json!({
            "manifest": manifest,
            "roots": state.roots,
            "branch": state.branch.as_str(),
            "delta_m_over_omega_b": state.delta_m_eff / p.omega_b,
            "delta_m_shift_over_omega_b": (state.delta_m_eff - state.delta_m_bare) / p.omega_b,
            "residual": state.residual,
        });
        return emit(&serde_json::to_string_pretty(&doc).expect("manifest serializes"));
    }
    // Writing into a String cannot fail.
    let mut out = String::new();
    let _ = writeln!(out, "config      {}", config.display());
    let _ = writeln!(out, "sha256      {}", digest.sha256);
    let _ = writeln!(out, "epsilon_m   {eps:.16e} rad/s\n");
    let _ = writeln!(out, "{:>4}  {:>24}", "root", "|m_s|^2");
    let selected = state.magnon_number();
    let pick = state
        .roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - selected).abs().total_cmp(&(b.1 - selected).abs()))
        .map(|(i, _)| i);
    for (i, x) in state.roots.iter().enumerate() {
        let mark = if Some(i) == pick { "  selected" } else { "" };
        let _ = writeln!(out, "{:>4}  {:>24.16e}{mark}", i + 1, x);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "branch                 {}", state.branch.as_str());
    let _ = writeln!(out, "Delta_m/omega_b        {:.16e}", state.delta_m_eff / p.omega_b);
    let _ = writeln!(
        out,
        "pull shift/omega_b     {:.16e}",
        (state.delta_m_eff - state.delta_m_bare) / p.omega_b
    );
    let _ = writeln!(out, "G_mb/omega_b           {:.16e}", state.g_eff(p).norm() / p.omega_b);
    let _ = writeln!(out, "residual               {:.3e}", state.residual);
    emit(&out)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let (resolved, digest) = load_config(&args.config)?;
    let base = resolved.params;
    let policy: BranchPolicy = args.branch.into();
    let quadrature: DragQuadrature = args.quadrature.into();

    let (specs, preset) = match &args.figure {
        Some(id) => {
            let preset = presets::preset(id, &base).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown figure `{id}`; known: {}",
                    presets::IDS.join(", ")
                ))
            })?;
            let specs: Vec<(Option<String>, SweepSpec)> = preset
                .curves
                .iter()
                .map(|(label, spec)| {
                    let mut spec = spec.clone();
                    spec.branch = policy;
                    spec.quadrature = quadrature;
                    (Some(label.clone()), spec)
                })
                .collect();
            (specs, Some(preset))
        }
        None => {
            let axis: Axis = args.axis.expect("clap requires axis without figure").into();
            let (range, samples) = match axis {
                Axis::Sigma => (presets::SIGMA_RANGE, presets::SIGMA_SAMPLES),
                Axis::Velocity => (presets::VELOCITY_RANGE, presets::VELOCITY_SAMPLES),
                Axis::Coupling => ((0.0, 0.5), 501),
                Axis::Power => ((0.0, 0.02), 201),
            };
            let range = args.range.as_ref().map_or(range, |r| (r[0], r[1]));
            let mut spec = SweepSpec::new(axis, range, args.samples.unwrap_or(samples), base);
            if axis != Axis::Velocity {
                if let Some(v) = resolved.velocity {
                    spec = spec.with_override(Override::Velocity(v));
                }
            }
            spec.branch = policy;
            spec.quadrature = quadrature;
            (vec![(None, spec)], None)
        }
    };

    let mut curves = Vec::with_capacity(specs.len());
    for (label, spec) in &specs {
        let table = sweep::run_sweep(spec)?;
        let failed = table.failed_rows();
        if failed > 0 {
            eprintln!(
                "warning: {failed} of {} rows flagged{}",
                table.rows.len(),
                label.as_deref().map(|l| format!(" in {l}")).unwrap_or_default()
            );
        }
        curves.push(Curve {
            label: label.clone(),
            table,
        });
    }

    output::write_atomic(&args.out, |w| Ok(sweep::write_csv(w, &curves)?))?;
    let manifest = RunManifest::new(&resolved, &digest, Some((args, preset.as_ref())), &specs)?
        .with_failures(&curves);
    let manifest_path = output::sibling(&args.out, "manifest", true);
    output::write_atomic(&manifest_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w).map_err(|e| CliError::Io(e.to_string()))
    })?;
    if args.gnuplot {
        let data_path = output::sibling(&args.out, "dat", false);
        let script_path = output::sibling(&args.out, "gp", false);
        let data_name = data_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let column = preset.as_ref().map(|p| p.column);
        let mut script = Vec::new();
        output::write_atomic(&data_path, |w| {
            Ok(sweep::write_gnuplot(w, &mut script, &curves, &data_name, column)?)
        })?;
        output::write_atomic(&script_path, |w| {
            w.write_all(&script).map_err(|e| CliError::Io(e.to_string()))
        })?;
    }
    Ok(())
}

fn cmd_features(csv: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let file = std::fs::File::open(csv)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", csv.display())))?;
    let curves = sweep::read_csv(std::io::BufReader::new(file))?;
    let mut reports = Vec::with_capacity(curves.len());
    for c in &curves {
        let report = extract_features(&c.table).map_err(|e| match e {
            FeatureError::AxisMismatch { .. } | FeatureError::TooFewRows(_) => {
                CliError::Schema(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        })?;
        reports.push(serde_json::json!({ "label": c.label, "report": report }));
    }
    let text = serde_json::to_string_pretty(&reports).expect("reports serialize");
    match out {
        Some(path) => output::write_atomic(path, |w| {
            writeln!(w, "{text}").map_err(|e| CliError::Io(e.to_string()))
        }),
        None => emit(&text),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Steady {
            config,
            branch,
            json,
        } => cmd_steady(&config, branch, json),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Features { csv, out } => cmd_features(&csv, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    std::panic::set_hook(Box::new(|info| {
        eprintln!("internal error: {info}");
    }));
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
        Err(_) => ExitCode::from(1),
    }
}
