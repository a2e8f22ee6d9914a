//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use crate::classify::{calibrate_transmission, verdict, verdict_from_curves, ClassifyError, VerdictReport};
use crate::config::{parse_config_with_env, RunConfig};
use crate::effective::{abs_energy, mbs_energy, EffectiveModelParams};
use crate::io::{
    line_plot_svg, provenance, read_sweep_csv, verdict_document, write_calibration, write_curve_csv,
    write_sweep_csv, IoError,
};
use crate::model::{validate, Severity};
use crate::spectrum::{sweep, SpectrumError, SweepResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mjspec", version, about = "Microwave spectra of nanowire Josephson junctions")]
pub struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true, env = "MJSPEC_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true, env = "MJSPEC_OUT")]
    pub out: Option<PathBuf>,
    /// Retained quasiparticle levels (overrides `k`).
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Omit the timestamp line from provenance headers.
    #[arg(long, global = true, env = "MJSPEC_NO_TIMESTAMP")]
    pub no_timestamp: bool,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, env = "MJSPEC_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Closed-form Andreev and Majorana curves for the configured transmissions.
    Analytic,
    /// Lattice sweep over the configured (b, eta, phi) grid.
    Sweep,
    /// Fit the Andreev model to zero-field sweeps for each eta.
    Calibrate,
    /// Classify a sweep CSV and write the verdict document.
    Classify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Analytic curves for T = 0.2 … 1.0 in units of the gap.
    Fig2,
    /// Trivial-phase sweeps at B = 0, 0.6, 0.8, 0.9 Bc.
    Fig3,
    /// Topological sweeps at B = 1.2, 1.4, 1.6, 1.8 Bc.
    Fig4,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Sweep => "sweep",
            Command::Calibrate => "calibrate",
            Command::Classify { .. } => "classify",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::Lattice(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e.root() {
            ClassifyError::Spectrum(SpectrumError::Lattice(_)) => CliError::Validation(e.to_string()),
            ClassifyError::Spectrum(_) | ClassifyError::Fit { .. } | ClassifyError::Gapless => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("mjspec: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    pool.install(|| dispatch(cli))
}

fn env_var(name: &str) -> Option<String> {
    std::env::var(name).ok()
}

/// Configuration for `cli`: the file when given, otherwise `fallback`; both
/// pass through environment overrides and the global flags.
fn load_config(cli: &Cli, fallback: Option<RunConfig>) -> Result<RunConfig, CliError> {
    let text = match (&cli.config, fallback) {
        (Some(path), _) => fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?,
        (None, Some(cfg)) => cfg.to_text(),
        (None, None) => {
            return Err(CliError::Validation(format!(
                "--config is required for {}",
                cli.command.name()
            )))
        }
    };
    let mut cfg = parse_config_with_env(&text, env_var).map_err(|e| CliError::Validation(e.to_string()))?;
    if let Some(k) = cli.k {
        if k < 2 {
            return Err(CliError::Validation("--k must be at least 2".into()));
        }
        cfg.k = k;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn timestamp(cli: &Cli) -> Option<u64> {
    if cli.no_timestamp {
        None
    } else {
        SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
    }
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&dir).map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

/// Rejects configurations with error-level diagnostics at any (eta, b).
fn check_physics(cfg: &RunConfig) -> Result<(), CliError> {
    let mut errors = Vec::new();
    let mut warned = false;
    for &b in &cfg.zeeman_mev() {
        for &eta in &cfg.eta {
            let params = cfg.material().with_zeeman(b);
            for d in validate(&params, &cfg.geometry().with_eta(eta)) {
                match d.severity() {
                    Severity::Error => {
                        let msg = d.to_string();
                        if !errors.contains(&msg) {
                            errors.push(msg);
                        }
                    }
                    Severity::Warning if !warned => {
                        eprintln!("mjspec: warning: {d}");
                        warned = true;
                    }
                    Severity::Warning => {}
                }
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(errors.join("; ")))
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    match &cli.command {
        Command::Analytic => {
            let cfg = load_config(cli, None)?;
            write_analytic(&cfg, name, timestamp(cli))
        }
        Command::Fig2 => {
            let cfg = load_config(cli, Some(fig2_config()))?;
            write_analytic(&cfg, name, timestamp(cli))
        }
        Command::Sweep => {
            let cfg = load_config(cli, None)?;
            let result = run_sweep(&cfg)?;
            let dir = output_dir(&cfg)?;
            write_sweep_csv(create(&dir.join("sweep.csv"))?, &result, &provenance(name, &cfg, timestamp(cli)))?;
            Ok(())
        }
        Command::Fig3 | Command::Fig4 => {
            let base = load_config(cli, Some(RunConfig::reference()))?;
            let fields: &[f64] = if matches!(cli.command, Command::Fig3) {
                &FIG3_FIELDS
            } else {
                &FIG4_FIELDS
            };
            let cfg = figure_config_from(base, fields);
            let result = run_sweep(&cfg)?;
            let report = verdict(&result, &cfg.thresholds())?;
            let dir = output_dir(&cfg)?;
            let prov = provenance(name, &cfg, timestamp(cli));
            write_sweep_csv(create(&dir.join(format!("{name}.csv")))?, &result, &prov)?;
            fs::write(dir.join(format!("{name}_verdict.txt")), verdict_document(&report, &prov))?;
            write_sweep_plots(&dir, name, &cfg, &result)?;
            println!("verdict = {}", report.verdict);
            Ok(())
        }
        Command::Calibrate => {
            let cfg = load_config(cli, None)?;
            check_physics(&RunConfig {
                b: vec![0.0],
                ..cfg.clone()
            })?;
            let cal = calibrate_transmission(
                &cfg.material(),
                &cfg.geometry(),
                &cfg.eta,
                &cfg.phase_grid(),
                &cfg.solver_options(),
            )?;
            for w in &cal.warnings {
                eprintln!("mjspec: warning: {w}");
            }
            let dir = output_dir(&cfg)?;
            write_calibration(
                create(&dir.join("calibration.csv"))?,
                &cal,
                &provenance(name, &cfg, timestamp(cli)),
            )?;
            Ok(())
        }
        Command::Classify { input } => {
            let cfg = load_config(cli, Some(RunConfig::reference()))?;
            let file = fs::File::open(input)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", input.display())))?;
            let curves = read_sweep_csv(file)?;
            let report: VerdictReport = verdict_from_curves(&curves, &cfg.thresholds())?;
            let dir = output_dir(&cfg)?;
            let mut prov = provenance(name, &cfg, timestamp(cli));
            prov.push(format!("# input = {}", input.display()));
            fs::write(dir.join("verdict.txt"), verdict_document(&report, &prov))?;
            println!("verdict = {}", report.verdict);
            Ok(())
        }
    }
}

pub const FIG2_TRANSMISSIONS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
pub const FIG3_FIELDS: [f64; 4] = [0.0, 0.6, 0.8, 0.9];
pub const FIG4_FIELDS: [f64; 4] = [1.2, 1.4, 1.6, 1.8];
/// Phase points of the figure sweeps; odd, so that π is a node.
pub const FIGURE_PHI_COUNT: usize = 161;

/// Analytic curves in units of the gap: Δ0 = Δ_eff = 1, g₁₂ = g₃₄ = 1/20.
pub fn fig2_config() -> RunConfig {
    RunConfig {
        delta0: 1.0,
        delta_eff: Some(1.0),
        transmissions: FIG2_TRANSMISSIONS.to_vec(),
        phi_count: 201,
        ..RunConfig::reference()
    }
}

/// Reference junction swept over `fields` (units of Bc) and η = 0.6 … 1.0.
pub fn figure_config(fields: &[f64]) -> RunConfig {
    figure_config_from(RunConfig::reference(), fields)
}

fn figure_config_from(base: RunConfig, fields: &[f64]) -> RunConfig {
    RunConfig {
        b: fields.to_vec(),
        b_unit: crate::config::FieldUnit::Bc,
        eta: vec![0.6, 0.7, 0.8, 0.9, 1.0],
        phi_start: 0.0,
        phi_stop: 2.0 * std::f64::consts::PI,
        phi_count: FIGURE_PHI_COUNT,
        ..base
    }
}

pub fn run_sweep(cfg: &RunConfig) -> Result<SweepResult, CliError> {
    check_physics(cfg)?;
    Ok(sweep(&cfg.material(), &cfg.geometry(), &cfg.sweep_grid(), &cfg.solver_options())?)
}

/// Per-transmission curves `(φ, E₋, E₊)` of both closed-form models.
pub fn analytic_curves(cfg: &RunConfig) -> Vec<(f64, Vec<(f64, f64, f64)>, Vec<(f64, f64, f64)>)> {
    let phases = cfg.phase_grid();
    cfg.transmissions
        .iter()
        .map(|&t| {
            let params = EffectiveModelParams {
                transmission_t: t,
                delta_eff: cfg.delta_eff(),
                g12: cfg.g12(),
                g34: cfg.g34(),
            };
            let abs = phases
                .values()
                .iter()
                .map(|&p| {
                    let (lo, hi) = abs_energy(t, p, cfg.delta0);
                    (p, lo, hi)
                })
                .collect();
            let mbs = phases
                .values()
                .iter()
                .map(|&p| {
                    let (lo, hi) = mbs_energy(&params, p);
                    (p, lo, hi)
                })
                .collect();
            (t, abs, mbs)
        })
        .collect()
}

fn write_analytic(cfg: &RunConfig, name: &str, ts: Option<u64>) -> Result<(), CliError> {
    let curves = analytic_curves(cfg);
    let dir = output_dir(cfg)?;
    let prov = provenance(name, cfg, ts);
    let mut abs_series = Vec::new();
    let mut mbs_series = Vec::new();
    let mut top: f64 = 0.0;
    for (t, abs, mbs) in &curves {
        write_curve_csv(create(&dir.join(format!("abs_T{t}.csv")))?, abs, &prov)?;
        write_curve_csv(create(&dir.join(format!("mbs_T{t}.csv")))?, mbs, &prov)?;
        for (series, pts) in [(&mut abs_series, abs), (&mut mbs_series, mbs)] {
            top = pts.iter().fold(top, |m, p| m.max(p.2));
            let mut line: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.2)).collect();
            line.extend(pts.iter().rev().map(|p| (p.0, p.1)));
            series.push((format!("T = {t}"), line));
        }
    }
    let (x0, x1) = (cfg.phi_start, cfg.phi_stop);
    let y = (-1.05 * top.max(f64::MIN_POSITIVE), 1.05 * top.max(f64::MIN_POSITIVE));
    fs::write(dir.join("abs.svg"), line_plot_svg("Andreev levels E±(φ)", &abs_series, (x0, x1), y))?;
    fs::write(dir.join("mbs.svg"), line_plot_svg("Majorana levels E±(φ)", &mbs_series, (x0, x1), y))?;
    Ok(())
}

fn write_sweep_plots(dir: &Path, name: &str, cfg: &RunConfig, result: &SweepResult) -> Result<(), CliError> {
    for (ib, b) in cfg.b.iter().enumerate() {
        let series: Vec<(String, Vec<(f64, f64)>)> = result
            .grid
            .etas
            .iter()
            .enumerate()
            .map(|(ie, eta)| (format!("η = {eta}"), result.curve(ib, ie)))
            .collect();
        let top = series
            .iter()
            .flat_map(|(_, c)| c.iter().map(|p| p.1))
            .fold(0.0, f64::max);
        let svg = line_plot_svg(
            &format!("ΔE(φ), B = {b} Bc"),
            &series,
            (cfg.phi_start, cfg.phi_stop),
            (0.0, 1.05 * top.max(f64::MIN_POSITIVE)),
        );
        fs::write(dir.join(format!("{name}_b{b}.svg")), svg)?;
    }
    Ok(())
}
