//! Argument types and the five subcommands.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use disloc::darboux::{DeformationSpec, DeformedSystem};
use disloc::io::{num, spectrum_csv, table_csv, wavefunction_csv};
use disloc::oracle::{convergence_study, grid_spectrum, GridConfig, OracleWarning, Potential};
use disloc::spectrum::{
    self, build_algebraic_equation, check_root_symmetry, closed_forms_ell6, default_window, find_spectrum_general,
    full_spectrum_hermite_case, negative_spectrum_hermite_case, Eigenvalue,
};
use disloc::states::{self, count_nodes, general_state, sample_grid, sample_state, PiecewiseState};
use disloc::PotentialSpec;

use crate::config::{pick, Config};
use crate::report::{Check, RunReport};
use crate::verify::{self, Fault, Suite};
use crate::{write_atomic, CliError};

/// Exact spectra, eigenfunctions and isospectral deformations of the
/// harmonic oscillator with a jump at the origin.
#[derive(Debug, Parser)]
#[command(name = "disloc", version, about)]
pub struct Cli {
    /// CSV output path; the CSV goes to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// JSON file whose keys mirror the long flags. Flags win over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Where to write the JSON run report.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels by the matching method or the exact polynomial.
    Spectrum(SpectrumArgs),
    /// Sample one eigenfunction, with both one-sided values at the origin.
    Wavefunction(WavefunctionArgs),
    /// Sample a Crum or Krein-Adler deformed potential and its states.
    Deform(DeformArgs),
    /// Finite-difference spectrum of the plain or deformed potential.
    Oracle(OracleArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
}

/// Chooses the undeformed potential.
#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Jump height.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "ell")]
    pub a: Option<f64>,
    /// Use the exactly solvable jump `a = 4 ell`.
    #[arg(long)]
    pub ell: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub emin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub emax: Option<f64>,
    /// Highest level index to report.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Bracket width of the refined roots.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub xmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xmax: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct WavefunctionArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Level index.
    #[arg(long)]
    pub n: Option<usize>,
    /// Build the state at this energy instead; it must be an eigenvalue.
    #[arg(long, allow_hyphen_values = true)]
    pub energy: Option<f64>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Add a `dpsi` column.
    #[arg(long)]
    pub dpsi: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DeformationArgs {
    /// Delete the lowest `M` levels.
    #[arg(long, conflicts_with = "delete")]
    pub crum: Option<usize>,
    /// Delete these levels (adjacent pairs), e.g. `1,2`.
    #[arg(long, value_delimiter = ',')]
    pub delete: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args)]
pub struct DeformArgs {
    #[arg(long)]
    pub ell: Option<u32>,
    #[command(flatten)]
    pub deformation: DeformationArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Number of retained states to sample.
    #[arg(long)]
    pub states: Option<usize>,
    /// Check the deformed spectrum with the grid oracle.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub deformation: DeformationArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    /// Also run a convergence study over these resolutions, e.g. `1000,2000,4000`.
    #[arg(long, value_delimiter = ',')]
    pub study: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Run the suite against a deliberately broken component.
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

/// What a command produced before anything is written.
pub struct Outcome {
    pub report: RunReport,
    pub csv: Option<String>,
    pub summary: String,
}

const DEFAULT_XMIN: f64 = -6.0;
const DEFAULT_XMAX: f64 = 6.0;
const DEFAULT_SAMPLES: usize = 1201;
const DEFAULT_NMAX: usize = 6;
const DEFAULT_STATES: usize = 3;
const DEFORM_ORACLE_LEVELS: usize = 4;
const ISOSPECTRAL_TOL: f64 = 2e-3;
const CONTINUITY_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 1e-9;

enum System {
    Jump(f64),
    Ladder(u32),
}

impl System {
    fn resolve(args: &SystemArgs, cfg: &Config) -> Result<Self, CliError> {
        let (a, ell) = if args.a.is_some() || args.ell.is_some() { (args.a, args.ell) } else { (cfg.a, cfg.ell) };
        match (a, ell) {
            (Some(a), None) => Ok(System::Jump(a)),
            (None, Some(ell)) => Ok(System::Ladder(ell)),
            (Some(_), Some(_)) => Err(CliError::Usage("give either a or ell, not both".into())),
            (None, None) => Err(CliError::Usage("one of --a or --ell is required".into())),
        }
    }

    fn spec(&self) -> Result<PotentialSpec, CliError> {
        Ok(match *self {
            System::Jump(a) => PotentialSpec::new(a)?,
            System::Ladder(ell) => PotentialSpec::hermite(ell)?,
        })
    }

    fn describe(&self) -> Value {
        match *self {
            System::Jump(a) => json!({ "a": a }),
            System::Ladder(ell) => json!({ "ell": ell, "a": 4.0 * ell as f64 }),
        }
    }
}

fn deformation(args: &DeformationArgs, cfg: &Config, ell: u32) -> Result<Option<DeformationSpec>, CliError> {
    let (crum, delete) =
        if args.crum.is_some() || args.delete.is_some() { (args.crum, args.delete.clone()) } else { (cfg.crum, cfg.delete.clone()) };
    match (crum, delete) {
        (Some(m), None) => Ok(Some(DeformationSpec::crum(ell, m))),
        (None, Some(d)) => Ok(Some(DeformationSpec::krein_adler(ell, d))),
        (Some(_), Some(_)) => Err(CliError::Usage("give either crum or delete, not both".into())),
        (None, None) => Ok(None),
    }
}

struct Sampling {
    xmin: f64,
    xmax: f64,
    samples: usize,
}

impl Sampling {
    fn resolve(args: &SamplingArgs, cfg: &Config) -> Self {
        Self {
            xmin: pick(args.xmin, cfg.xmin, DEFAULT_XMIN),
            xmax: pick(args.xmax, cfg.xmax, DEFAULT_XMAX),
            samples: pick(args.samples, cfg.samples, DEFAULT_SAMPLES),
        }
    }
}

fn levels_json(levels: &[Eigenvalue]) -> Value {
    serde_json::to_value(levels).unwrap_or(Value::Null)
}

fn write_levels(summary: &mut String, levels: &[Eigenvalue]) {
    for l in levels {
        let _ = writeln!(summary, "  E_{:<3} = {:>16.10}  ({})", l.n, l.energy, l.provenance);
    }
}

fn cmd_spectrum(args: &SpectrumArgs, cfg: &Config) -> Result<Outcome, CliError> {
    let system = System::resolve(&args.system, cfg)?;
    let spec = system.spec()?;
    let emin = args.emin.or(cfg.emin);
    let emax = args.emax.or(cfg.emax);
    let nmax = args.nmax.or(cfg.nmax);
    let mut inputs = system.describe();
    inputs["emin"] = json!(emin);
    inputs["emax"] = json!(emax);
    inputs["nmax"] = json!(nmax);
    let mut report = RunReport::new("spectrum", inputs);
    let mut summary = String::new();

    let in_window = |e: f64| emin.is_none_or(|lo| e >= lo) && emax.is_none_or(|hi| e <= hi);
    let levels = match system {
        System::Jump(a) => {
            let tol = pick(args.tol, cfg.tol, spectrum::DEFAULT_TOL);
            report.inputs["tol"] = json!(tol);
            let nmax_eff = nmax.unwrap_or(DEFAULT_NMAX);
            let (lo, hi) = default_window(&spec, nmax_eff);
            let found = find_spectrum_general(&spec, emin.unwrap_or(lo), emax.unwrap_or(hi), spectrum::DEFAULT_SCAN_STEP, tol)?;
            report.warnings.extend(found.warnings.iter().map(|w| format!("{w:?}")));
            let mut levels = found.levels;
            if emin.is_none() && emax.is_none() || nmax.is_some() {
                levels.retain(|l| l.n <= nmax_eff);
            }
            let _ = writeln!(summary, "a = {a}: {} levels", levels.len());
            levels
        }
        System::Ladder(ell) => {
            let tol = pick(args.tol, cfg.tol, spectrum::STATE_TOL);
            report.inputs["tol"] = json!(tol);
            let eq = build_algebraic_equation(ell)?;
            let mut levels = match nmax {
                Some(n) if n >= ell as usize => full_spectrum_hermite_case(ell, n)?,
                Some(n) => {
                    let mut l = negative_spectrum_hermite_case(ell, tol)?;
                    l.truncate(n + 1);
                    l
                }
                None => negative_spectrum_hermite_case(ell, tol)?,
            };
            let negative: Vec<f64> = levels.iter().filter(|l| l.energy < 0.0).map(|l| l.energy).collect();
            let symmetry = check_root_symmetry(&negative, ell);
            let coeffs: Vec<String> = eq.coefficients.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(summary, "a = {} (ell = {ell})", 4 * ell);
            let _ = writeln!(summary, "P(E) coefficients, ascending: [{}]", coeffs.join(", "));
            let _ = writeln!(summary, "root symmetry residual: {symmetry:.3e}");
            report.checks.push(Check::at_most("root symmetry E <-> -2-4l-E", symmetry, SYMMETRY_TOL));
            let mut data = json!({ "coefficients": coeffs, "symmetry_residual": symmetry });
            if ell == 6 && negative.len() == 6 {
                let closed = closed_forms_ell6()?;
                let gap = closed.iter().zip(&negative).map(|(c, r)| (c - r).abs()).fold(0.0, f64::max);
                let _ = writeln!(summary, "closed forms vs Sturm roots: max |diff| = {gap:.3e}");
                report.checks.push(Check::at_most("closed forms vs Sturm roots", gap, CLOSED_FORM_TOL));
                data["closed_forms"] = json!(closed);
            }
            levels.retain(|l| in_window(l.energy));
            report.data = data;
            levels
        }
    };
    if levels.is_empty() {
        report.warnings.push("no levels in the requested window".into());
    }
    write_levels(&mut summary, &levels);
    let levels_value = levels_json(&levels);
    match &mut report.data {
        Value::Object(m) => {
            m.insert("levels".into(), levels_value);
        }
        d => *d = json!({ "levels": levels_value }),
    }
    Ok(Outcome { report, csv: Some(spectrum_csv(&levels)), summary })
}

fn cmd_wavefunction(args: &WavefunctionArgs, cfg: &Config) -> Result<Outcome, CliError> {
    let system = System::resolve(&args.system, cfg)?;
    let spec = system.spec()?;
    let energy = args.energy.or(cfg.energy);
    let n = pick(args.n, cfg.n, 0);
    let sampling = Sampling::resolve(&args.sampling, cfg);
    let with_slope = args.dpsi || cfg.dpsi.unwrap_or(false);
    let mut inputs = system.describe();
    inputs["n"] = json!(n);
    inputs["energy"] = json!(energy);
    inputs["xmin"] = json!(sampling.xmin);
    inputs["xmax"] = json!(sampling.xmax);
    inputs["samples"] = json!(sampling.samples);
    let mut report = RunReport::new("wavefunction", inputs);

    let state: PiecewiseState = match energy {
        Some(e) => general_state(&spec, e)?,
        None => states::eigenstate(&spec, n)?,
    };
    let samples = sample_state(&state, sampling.xmin, sampling.xmax, sampling.samples)?;
    let (jump_value, jump_slope) = state.continuity_residuals()?;
    let nodes = count_nodes(&state, 10.0_f64.max(sampling.xmax.abs()).max(sampling.xmin.abs()), 8001)?;
    report.checks.push(Check::at_most("origin continuity of psi", jump_value, CONTINUITY_TOL));
    report.checks.push(Check::at_most("origin continuity of dpsi", jump_slope, CONTINUITY_TOL));
    if energy.is_none() {
        report.checks.push(Check::at_most("node count minus level index", (nodes as f64 - n as f64).abs(), 0.0));
    }
    report.data = json!({
        "energy": state.energy,
        "level": state.level,
        "nodes": nodes,
        "continuity": { "psi": jump_value, "dpsi": jump_slope },
        "neumann": state.neumann_exact(),
    });
    let mut summary = String::new();
    let _ = writeln!(summary, "E = {}  nodes = {nodes}", num(state.energy));
    let _ = writeln!(summary, "origin residuals: psi {jump_value:.3e}, dpsi {jump_slope:.3e}");
    Ok(Outcome { report, csv: Some(wavefunction_csv(&samples, with_slope)), summary })
}

fn deformed_system(ell: u32, spec: &DeformationSpec) -> Result<DeformedSystem, CliError> {
    debug_assert_eq!(ell, spec.ell);
    Ok(DeformedSystem::from_spec(spec)?)
}

fn oracle_check(sys: &DeformedSystem, report: &mut RunReport) -> Result<(), CliError> {
    let cfg = GridConfig::new(8.0, 4000, DEFORM_ORACLE_LEVELS)?;
    let grid = grid_spectrum(sys, &cfg)?;
    let want: Vec<f64> = sys.retained_levels.iter().take(DEFORM_ORACLE_LEVELS).map(|&(_, e)| e).collect();
    let got = grid.energies();
    let worst = got.iter().zip(&want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    report.checks.push(Check::at_most("oracle spectrum vs retained levels", worst, ISOSPECTRAL_TOL));
    report.warnings.extend(grid.warnings.iter().map(oracle_warning));
    report.data["oracle"] = json!({ "expected": want, "levels": levels_json(&grid.levels), "max_error": worst });
    Ok(())
}

fn oracle_warning(w: &OracleWarning) -> String {
    match w {
        OracleWarning::Truncation { level, boundary_ratio } => {
            format!("level {level} is truncated by the box (boundary ratio {boundary_ratio:.2e})")
        }
    }
}

fn cmd_deform(args: &DeformArgs, cfg: &Config) -> Result<Outcome, CliError> {
    let ell = args.ell.or(cfg.ell).ok_or_else(|| CliError::Usage("--ell is required".into()))?;
    let spec = deformation(&args.deformation, cfg, ell)?.ok_or_else(|| CliError::Usage("one of --crum or --delete is required".into()))?;
    let sampling = Sampling::resolve(&args.sampling, cfg);
    let count = pick(args.states, cfg.states, DEFAULT_STATES);
    let run_oracle = args.verify || cfg.verify.unwrap_or(false);
    let mut inputs = serde_json::to_value(&spec)?;
    inputs["states"] = json!(count);
    inputs["xmin"] = json!(sampling.xmin);
    inputs["xmax"] = json!(sampling.xmax);
    inputs["samples"] = json!(sampling.samples);
    inputs["verify"] = json!(run_oracle);
    let mut report = RunReport::new("deform", inputs);

    let sys = deformed_system(ell, &spec)?;
    let retained = sys.retained_indices(count);
    let levels = retained.iter().map(|&n| states::eigenstate(&sys.base, n)).collect::<Result<Vec<_>, _>>()?;
    let mut header = vec!["x".to_string(), "V".to_string()];
    header.extend(retained.iter().map(|n| format!("psi_{n}")));
    let mut rows = Vec::new();
    for (x, side) in sample_grid(sampling.xmin, sampling.xmax, sampling.samples)? {
        let mut row = vec![x, sys.potential(x, Some(side))?];
        for level in &levels {
            row.push(sys.state_for(level, x, Some(side))?);
        }
        rows.push(row);
    }
    report.data = json!({
        "deleted": sys.deleted,
        "retained_levels": sys.retained_levels,
        "regularity": sys.regularity,
    });
    let mut summary = String::new();
    let _ = writeln!(summary, "ell = {ell}, deleted levels {:?}", sys.deleted);
    let _ = writeln!(summary, "Wronskian regularity: min ratio {:.3e} at x = {:.3}", sys.regularity.min_ratio, sys.regularity.x_at_min);
    let shown: Vec<String> = sys.retained_levels.iter().take(6).map(|(n, e)| format!("{n}:{e}")).collect();
    let _ = writeln!(summary, "retained levels: {}", shown.join(" "));
    if run_oracle {
        oracle_check(&sys, &mut report)?;
        let _ = writeln!(summary, "oracle: max |dE| = {:.3e}", report.checks.last().map_or(f64::NAN, |c| c.residual));
    }
    Ok(Outcome { report, csv: Some(table_csv(&header, &rows)), summary })
}

fn run_oracle<P: Potential>(
    potential: &P,
    grid: &GridConfig,
    study: Option<&[usize]>,
    report: &mut RunReport,
    summary: &mut String,
) -> Result<String, CliError> {
    let spec = grid_spectrum(potential, grid)?;
    report.warnings.extend(spec.warnings.iter().map(oracle_warning));
    report.data["levels"] = levels_json(&spec.levels);
    report.data["coarse"] = json!(spec.coarse);
    write_levels(summary, &spec.levels);
    if let Some(points) = study {
        let s = convergence_study(potential, grid.half_width, points, grid.levels)?;
        for (k, orders) in s.orders.iter().enumerate() {
            let shown: Vec<String> = orders.iter().map(|p| format!("{p:.2}")).collect();
            let _ = writeln!(summary, "order from N = {}..{}: [{}]", points[k], points[k + 2], shown.join(", "));
        }
        report.data["study"] = serde_json::to_value(&s)?;
    }
    Ok(spectrum_csv(&spec.levels))
}

fn cmd_oracle(args: &OracleArgs, cfg: &Config) -> Result<Outcome, CliError> {
    let system = System::resolve(&args.system, cfg)?;
    let half_width = pick(args.half_width, cfg.half_width, 8.0);
    let points = pick(args.points, cfg.points, 4000);
    let levels = pick(args.levels, cfg.levels, 8);
    let study = args.study.clone().or_else(|| cfg.study.clone());
    let grid = GridConfig::new(half_width, points, levels)?;
    let deform = match system {
        System::Ladder(ell) => deformation(&args.deformation, cfg, ell)?,
        System::Jump(_) => {
            if deformation(&args.deformation, cfg, 0)?.is_some() {
                return Err(CliError::Usage("deformations need --ell".into()));
            }
            None
        }
    };
    let mut inputs = system.describe();
    inputs["deformation"] = serde_json::to_value(&deform)?;
    inputs["half_width"] = json!(half_width);
    inputs["points"] = json!(points);
    inputs["levels"] = json!(levels);
    inputs["study"] = json!(study);
    let mut report = RunReport::new("oracle", inputs);
    report.data = json!({});
    let mut summary = format!("grid: L = {half_width}, N = {points}\n");
    let csv = match &deform {
        Some(d) => run_oracle(&DeformedSystem::from_spec(d)?, &grid, study.as_deref(), &mut report, &mut summary)?,
        None => run_oracle(&system.spec()?, &grid, study.as_deref(), &mut report, &mut summary)?,
    };
    Ok(Outcome { report, csv: Some(csv), summary })
}

fn cmd_verify(args: &VerifyArgs, cfg: &Config) -> Result<Outcome, CliError> {
    let suite = match (args.suite, cfg.suite.as_deref()) {
        (Some(s), _) => s,
        (None, Some("quick")) | (None, None) => Suite::Quick,
        (None, Some("full")) => Suite::Full,
        (None, Some(other)) => return Err(CliError::Usage(format!("unknown suite {other:?}"))),
    };
    let suite_name = match suite {
        Suite::Quick => "quick",
        Suite::Full => "full",
    };
    let mut report = RunReport::new("verify", json!({ "suite": suite_name, "fault": args.inject_fault.map(|f| format!("{f:?}")) }));
    report.checks = verify::run_suite(suite, args.inject_fault);
    let mut summary = String::new();
    for c in &report.checks {
        let _ = writeln!(
            summary,
            "{}  {:<58} {:>12.3e} {} {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            match c.relation {
                crate::report::Relation::AtMost => "<=",
                crate::report::Relation::Exceeds => "> ",
            },
            c.tolerance
        );
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(summary, "{} checks, {failed} failed", report.checks.len());
    Ok(Outcome { report, csv: None, summary })
}

/// Runs one parsed invocation: computes, writes the CSV (to `--out` or
/// stdout) and the report, and prints the summary. Returns the report so the
/// caller can set the exit status.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let out = cli.out.clone().or_else(|| cfg.out.clone());
    let report_path = cli.report.clone().or_else(|| cfg.report.clone());
    let mut outcome = match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, &cfg)?,
        Command::Wavefunction(a) => cmd_wavefunction(a, &cfg)?,
        Command::Deform(a) => cmd_deform(a, &cfg)?,
        Command::Oracle(a) => cmd_oracle(a, &cfg)?,
        Command::Verify(a) => cmd_verify(a, &cfg)?,
    };
    let mut csv_on_stdout = false;
    if let Some(csv) = &outcome.csv {
        match &out {
            Some(path) => {
                write_atomic(path, csv.as_bytes())?;
                outcome.report.outputs.push(path.display().to_string());
            }
            None => {
                print!("{csv}");
                csv_on_stdout = true;
            }
        }
    }
    outcome.report.wall_time_s = start.elapsed().as_secs_f64();
    if let Some(path) = &report_path {
        outcome.report.outputs.push(path.display().to_string());
        let mut text = serde_json::to_string_pretty(&outcome.report)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    for w in &outcome.report.warnings {
        eprintln!("warning: {w}");
    }
    if csv_on_stdout {
        eprint!("{}", outcome.summary);
    } else {
        print!("{}", outcome.summary);
    }
    Ok(outcome.report)
}
