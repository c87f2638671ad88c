//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure. Errors go to
//! stderr followed by a `status=error kind=... key=... exit=...` trailer line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::calibration::{fit, hindcast_compare, lambda_audit, CostSeries};
use crate::climate::{climate_trajectory, ClimateParams, EmissionsMode};
use crate::decoupling::{breakeven_rate, critical_time, required_h, Breakeven};
use crate::error::{Error, Result};
use crate::model::{Bounds, CurveKind, Sampling, Scenario};
use crate::scenario_io::{
    emit_trajectory, format_number, numeric_csv, parse_config, parse_cost_series, parse_grid_axis, parse_number,
    preset, trajectory_fields, OutputFormat, PolicyInput, ScenarioConfig, ScenarioSpec, TRAJECTORY_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const MAX_SWEEP_ROWS: usize = 10_000_000;

/// Axis values of one grid point and its trajectory rows.
type SweepPoint = (Vec<f64>, Vec<[f64; 8]>);

fn number(s: &str) -> std::result::Result<f64, String> {
    parse_number(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "thermocost", version, about = "Thermodynamic-cost learning curves, exergy trajectories and decoupling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cost and exergy trajectory of a scenario.
    Simulate(SimulateArgs),
    /// Growth rate at which long-run exergy consumption is stationary.
    Breakeven(BreakevenArgs),
    /// Innovation rate needed to hold exergy constant, up to a fraction of the critical time.
    RequiredH(RequiredHArgs),
    /// Time after which no finite innovation rate holds exergy constant.
    CriticalTime(CriticalTimeArgs),
    /// Fit learning-curve models to a `t,Q,c` series.
    Fit(FitArgs),
    /// Rank models by out-of-sample error on the tail of a series.
    Hindcast(HindcastArgs),
    /// Cumulative emissions and warming of a scenario.
    Climate(ClimateArgs),
    /// Evaluate trajectories over a Cartesian parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// JSON scenario configuration.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in scenario: fig1-growth, fig1-low, fig1-zero, fig1-negative, fig2.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    #[arg(long, value_parser = number)]
    pub lambda: Option<f64>,
    #[arg(long, value_parser = number)]
    pub h: Option<f64>,
    #[arg(long, value_parser = number, conflicts_with = "gamma")]
    pub p: Option<f64>,
    #[arg(long, value_parser = number)]
    pub gamma: Option<f64>,
    #[arg(long = "r-b", value_parser = number)]
    pub r_b: Option<f64>,
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// Relax the default plausibility ranges.
    #[arg(long)]
    pub override_bounds: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    #[arg(long = "t-max", value_parser = number)]
    pub t_max: Option<f64>,
    #[arg(long, value_parser = number)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// csv or svg.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BreakevenArgs {
    #[arg(long, value_parser = number)]
    pub lambda: f64,
    #[arg(long, value_parser = number)]
    pub h: f64,
    #[arg(long, value_parser = number, default_value = "0")]
    pub theta: f64,
    #[arg(long, default_value_t = 6)]
    pub digits: usize,
}

#[derive(Debug, Args)]
pub struct CriticalTimeArgs {
    #[arg(long, value_parser = number)]
    pub theta0: f64,
    #[arg(long, value_parser = number)]
    pub r: f64,
    #[arg(long, default_value_t = 6)]
    pub digits: usize,
}

#[derive(Debug, Args)]
pub struct RequiredHArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Stop before this fraction of the critical time.
    #[arg(long, value_parser = number, default_value = "0.99")]
    pub fraction: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Comma-separated kinds, or `all`.
    #[arg(long, default_value = "all")]
    pub kind: String,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HindcastArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value = "all")]
    pub kinds: String,
    #[arg(long, value_parser = number, default_value = "0.7")]
    pub split: f64,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClimateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, value_parser = number)]
    pub kappa0: f64,
    #[arg(long, value_parser = number, default_value = "0", allow_hyphen_values = true)]
    pub eta: f64,
    /// TCRE in °C per unit of cumulative carbon.
    #[arg(long, value_parser = number)]
    pub rho: f64,
    /// asymptotic, exact or printed.
    #[arg(long, default_value = "asymptotic")]
    pub mode: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Axis `key=v1,v2,...` or `key=start:stop:count`; repeat for more axes.
    #[arg(long = "grid", required = true, allow_hyphen_values = true)]
    pub grid: Vec<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn io_error(path: &Path, err: std::io::Error) -> Error {
    Error::Validation {
        key: path.display().to_string(),
        message: err.to_string(),
    }
}

struct Resolved {
    spec: ScenarioSpec,
    bounds: Bounds,
    config: Option<ScenarioConfig>,
}

fn resolve_scenario(args: &ScenarioArgs) -> Result<Resolved> {
    let mut config = None;
    let mut spec = if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let cfg = parse_config(&text)?;
        config = Some(cfg);
        Some(cfg.scenario)
    } else if let Some(name) = &args.preset {
        Some(preset(name)?)
    } else {
        None
    };
    let overrides = [
        ("theta0", args.theta0),
        ("lambda", args.lambda),
        ("h", args.h),
        ("p", args.p),
        ("gamma", args.gamma),
        ("r_b", args.r_b),
        ("r", args.r),
    ];
    if spec.is_none() {
        let get = |key: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::validation(key, "missing: give --config, --preset, or all scenario flags"))
        };
        let policy = match (args.p, args.gamma) {
            (Some(p), None) => PolicyInput::P(p),
            (None, Some(g)) => PolicyInput::Gamma(g),
            _ => return Err(Error::validation("p", "missing: give --p or --gamma")),
        };
        spec = Some(ScenarioSpec::Relative {
            theta0: get("theta0", args.theta0)?,
            lambda: get("lambda", args.lambda)?,
            h: get("h", args.h)?,
            policy,
            r_b: get("r_b", args.r_b)?,
            r: get("r", args.r)?,
        });
    } else if let Some(s) = spec.as_mut() {
        for (key, value) in overrides {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
    }
    let bounds = Bounds::from_override(args.override_bounds || config.is_some_and(|c| c.override_bounds));
    Ok(Resolved {
        spec: spec.expect("resolved above"),
        bounds,
        config,
    })
}

fn resolve_sampling(args: &SamplingArgs, config: Option<&ScenarioConfig>, default_t_max: f64) -> Result<Sampling> {
    let base = config.map(|c| c.sampling);
    let t_max = args.t_max.or(base.map(|s| s.t_max)).unwrap_or(default_t_max);
    let dt = args.dt.or(base.map(|s| s.dt)).unwrap_or(0.5);
    Sampling::new(t_max, dt)
}

fn parse_kinds(text: &str) -> Result<Vec<CurveKind>> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(CurveKind::ALL.to_vec());
    }
    text.split(',').map(str::parse).collect()
}

/// Round to `digits` significant digits and drop trailing zeros.
pub fn format_significant(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.clamp(1, 17);
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn write_output(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| io_error(p, e)),
        None => stdout
            .write_all(bytes)
            .map_err(|e| Error::validation("stdout", e.to_string())),
    }
}

fn read_series(path: &Path, label: Option<&str>) -> Result<CostSeries> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let label = label.map(str::to_string).unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    parse_cost_series(&text, &label)
}

fn json_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializing a Value cannot fail");
    text.push('\n');
    text.into_bytes()
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let resolved = resolve_scenario(&args.scenario)?;
    let scn = resolved.spec.build(resolved.bounds)?;
    let sampling = resolve_sampling(&args.sampling, resolved.config.as_ref(), 50.0)?;
    let format = match &args.format {
        Some(f) => f.parse()?,
        None => resolved.config.map(|c| c.output.format).unwrap_or(OutputFormat::Csv),
    };
    let points = scn.trajectory(&sampling)?;
    write_output(args.output.as_deref(), &emit_trajectory(&points, format), stdout)
}

fn required_h_cmd(args: &RequiredHArgs, stdout: &mut dyn Write) -> Result<()> {
    let resolved = resolve_scenario(&args.scenario)?;
    let scn = resolved.spec.build(resolved.bounds)?;
    if !(args.fraction > 0.0 && args.fraction < 1.0) {
        return Err(Error::validation("fraction", format!("must lie in (0, 1), got {}", args.fraction)));
    }
    let t_inf = critical_time(scn.policy.theta0, scn.r)?;
    let limit = if t_inf.is_finite() {
        args.fraction * t_inf
    } else {
        args.sampling
            .t_max
            .ok_or_else(|| Error::validation("t_max", "critical time is infinite; give --t-max"))?
    };
    let dt = args.sampling.dt.unwrap_or(0.5);
    let sampling = Sampling::new(limit.max(dt), dt)?;
    let rows = sampling
        .times()
        .into_iter()
        .filter(|&t| t <= limit)
        .map(|t| required_h(&scn, t).map(|d| [d.t, d.h_required]))
        .collect::<Result<Vec<_>>>()?;
    let csv = numeric_csv(&["t", "h_required"], rows.iter().map(|r| r.as_slice()));
    write_output(args.output.as_deref(), csv.as_bytes(), stdout)
}

fn fit_cmd(args: &FitArgs, stdout: &mut dyn Write) -> Result<()> {
    let series = read_series(&args.input, args.label.as_deref())?;
    let kinds = parse_kinds(&args.kind)?;
    let fits = kinds.iter().map(|&k| fit(&series, k)).collect::<Result<Vec<_>>>()?;
    let audit = lambda_audit(&fits).ok();
    let report = json!({ "series": series.label, "n": series.len(), "fits": fits, "lambda_audit": audit });
    write_output(args.output.as_deref(), &json_bytes(&report), stdout)
}

fn hindcast_cmd(args: &HindcastArgs, stdout: &mut dyn Write) -> Result<()> {
    let series = read_series(&args.input, args.label.as_deref())?;
    let kinds = parse_kinds(&args.kinds)?;
    let ranking = hindcast_compare(&series, &kinds, args.split)?;
    let report = json!({
        "series": series.label,
        "split": args.split,
        "n_train": ranking.n_train,
        "n_test": ranking.n_test,
        "ranking": ranking.entries.iter().map(|e| json!({"kind": e.kind, "score": e.score})).collect::<Vec<_>>(),
        "fits": ranking.entries.iter().map(|e| &e.fit).collect::<Vec<_>>(),
    });
    write_output(args.output.as_deref(), &json_bytes(&report), stdout)
}

fn climate_cmd(args: &ClimateArgs, stdout: &mut dyn Write) -> Result<()> {
    let resolved = resolve_scenario(&args.scenario)?;
    let scn = resolved.spec.build(resolved.bounds)?;
    let cp = ClimateParams::new(args.kappa0, args.eta, args.rho, resolved.bounds)?;
    let mode: EmissionsMode = args.mode.parse()?;
    let sampling = resolve_sampling(&args.sampling, resolved.config.as_ref(), 50.0)?;
    let pts = climate_trajectory(&scn, &cp, &sampling.times(), mode)?;
    let rows: Vec<[f64; 3]> = pts.iter().map(|p| [p.t, p.emissions, p.delta_t]).collect();
    let csv = numeric_csv(&["t", "emissions", "delta_T"], rows.iter().map(|r| r.as_slice()));
    write_output(args.output.as_deref(), csv.as_bytes(), stdout)
}

fn sweep_cmd(args: &SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    let resolved = resolve_scenario(&args.scenario)?;
    let sampling = resolve_sampling(&args.sampling, resolved.config.as_ref(), 50.0)?;
    let axes = args
        .grid
        .iter()
        .map(|g| parse_grid_axis(g))
        .collect::<Result<Vec<_>>>()?;
    for (i, (key, _)) in axes.iter().enumerate() {
        if !resolved.spec.keys().contains(&key.as_str()) {
            return Err(Error::validation(format!("grid.{key}"), "not a parameter of this scenario form"));
        }
        if axes[..i].iter().any(|(k, _)| k == key) {
            return Err(Error::validation(format!("grid.{key}"), "axis given twice"));
        }
    }
    let n_points: usize = axes.iter().map(|(_, v)| v.len()).product();
    let times = sampling.times();
    if n_points.saturating_mul(times.len()) > MAX_SWEEP_ROWS {
        return Err(Error::validation("grid", format!("more than {MAX_SWEEP_ROWS} rows requested")));
    }

    // Row-major: the last axis varies fastest.
    let point_values = |mut index: usize| -> Vec<f64> {
        let mut values = vec![0.0; axes.len()];
        for (slot, (_, vals)) in values.iter_mut().zip(&axes).rev() {
            *slot = vals[index % vals.len()];
            index /= vals.len();
        }
        values
    };
    let evaluated: Vec<Result<SweepPoint>> = (0..n_points)
        .into_par_iter()
        .map(|index| {
            let values = point_values(index);
            let mut spec = resolved.spec;
            for ((key, _), &v) in axes.iter().zip(&values) {
                spec.set(key, v)?;
            }
            let scn: Scenario = spec.build(resolved.bounds).map_err(|e| match e {
                Error::Validation { key, message } => Error::Validation {
                    key: format!("grid[{index}].{key}"),
                    message,
                },
                other => other,
            })?;
            let rows = times
                .iter()
                .map(|&t| scn.point(t).map(|p| trajectory_fields(&p)))
                .collect::<Result<Vec<_>>>()?;
            Ok((values, rows))
        })
        .collect();

    let mut out = String::from("point");
    for (key, _) in &axes {
        out.push(',');
        out.push_str(key);
    }
    for col in TRAJECTORY_HEADER {
        out.push(',');
        out.push_str(col);
    }
    out.push('\n');
    for (index, item) in evaluated.into_iter().enumerate() {
        let (values, rows) = item?;
        let prefix: Vec<String> = values.iter().map(|&v| format_number(v)).collect();
        for row in rows {
            out.push_str(&index.to_string());
            for p in &prefix {
                out.push(',');
                out.push_str(p);
            }
            for v in row {
                out.push(',');
                out.push_str(&format_number(v));
            }
            out.push('\n');
        }
    }
    write_output(args.output.as_deref(), out.as_bytes(), stdout)
}

fn breakeven_cmd(args: &BreakevenArgs, stdout: &mut dyn Write) -> Result<()> {
    let line = match breakeven_rate(args.lambda, args.h, args.theta)? {
        Breakeven::Rate(r) => format_significant(r, args.digits),
        Breakeven::NoPositiveRate => "none".to_string(),
    };
    write_output(None, format!("{line}\n").as_bytes(), stdout)
}

fn critical_time_cmd(args: &CriticalTimeArgs, stdout: &mut dyn Write) -> Result<()> {
    let t = critical_time(args.theta0, args.r)?;
    write_output(None, format!("{}\n", format_significant(t, args.digits)).as_bytes(), stdout)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a, stdout),
        Command::Breakeven(a) => breakeven_cmd(a, stdout),
        Command::RequiredH(a) => required_h_cmd(a, stdout),
        Command::CriticalTime(a) => critical_time_cmd(a, stdout),
        Command::Fit(a) => fit_cmd(a, stdout),
        Command::Hindcast(a) => hindcast_cmd(a, stdout),
        Command::Climate(a) => climate_cmd(a, stdout),
        Command::Sweep(a) => sweep_cmd(a, stdout),
    }
}

fn trailer(kind: &str, key: Option<&str>, code: i32) -> String {
    let key = key.map(|k| k.replace(char::is_whitespace, "_")).unwrap_or_else(|| "-".into());
    format!("status=error kind={kind} key={key} exit={code}")
}

/// Parse `args` (including the program name) and run, returning the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "{e}");
            let _ = writeln!(stderr, "{}", trailer("usage", None, EXIT_VALIDATION));
            return EXIT_VALIDATION;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let code = if err.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION };
            let _ = writeln!(stderr, "error: {err}");
            let _ = writeln!(stderr, "{}", trailer(err.kind(), err.key().as_deref(), code));
            code
        }
    }
}
