//! Scenario configuration documents, cost-series CSV input, and CSV / SVG output.
//!
//! A configuration is one JSON object:
//!
//! ```json
//! {
//!   "scenario": { "theta0": 0.2, "lambda": 0.3333333333333333, "h": 0.01,
//!                 "p": 2.6, "r_b": 0.025, "r": 0.025 },
//!   "sampling": { "t_max": 50, "dt": 0.5 },
//!   "output": { "format": "csv" },
//!   "override_bounds": false
//! }
//! ```
//!
//! `scenario` is either the relative form above (`gamma` may replace `p`) or the
//! absolute form `{a, c_f, lambda, h, y0, r_b, p, r}`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::calibration::{CostRecord, CostSeries};
use crate::error::{Error, Result};
use crate::model::{
    policy_coefficient_from_gamma, AbsoluteParams, Bounds, RelativeParams, Sampling, Scenario,
    TrajectoryPoint,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyInput {
    P(f64),
    /// Fractional first-step saving, converted to `p` on build.
    Gamma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioSpec {
    Relative {
        theta0: f64,
        lambda: f64,
        h: f64,
        policy: PolicyInput,
        r_b: f64,
        r: f64,
    },
    Absolute(AbsoluteParams),
}

const RELATIVE_KEYS: [&str; 7] = ["theta0", "lambda", "h", "p", "gamma", "r_b", "r"];
const ABSOLUTE_KEYS: [&str; 8] = ["a", "c_f", "lambda", "h", "y0", "r_b", "p", "r"];

fn prefixed(prefix: &str, err: Error) -> Error {
    match err {
        Error::Validation { key, message } => Error::Validation { key: format!("{prefix}.{key}"), message },
        Error::Domain { key, message } => Error::Domain { key: format!("{prefix}.{key}"), message },
        other => other,
    }
}

impl ScenarioSpec {
    pub fn relative(params: RelativeParams) -> Self {
        ScenarioSpec::Relative {
            theta0: params.theta0,
            lambda: params.lambda,
            h: params.h,
            policy: PolicyInput::P(params.p),
            r_b: params.r_b,
            r: params.r,
        }
    }

    pub fn build(&self, bounds: Bounds) -> Result<Scenario> {
        match *self {
            ScenarioSpec::Relative { theta0, lambda, h, policy, r_b, r } => {
                let p = match policy {
                    PolicyInput::P(p) => p,
                    PolicyInput::Gamma(gamma) => policy_coefficient_from_gamma(gamma, theta0, lambda)?,
                };
                Scenario::relative(RelativeParams { theta0, lambda, h, p, r_b, r }, bounds)
            }
            ScenarioSpec::Absolute(params) => Scenario::absolute(params, bounds),
        }
    }

    /// Keys that [`ScenarioSpec::set`] accepts for this form.
    pub fn keys(&self) -> &'static [&'static str] {
        match self {
            ScenarioSpec::Relative { .. } => &RELATIVE_KEYS,
            ScenarioSpec::Absolute(_) => &ABSOLUTE_KEYS,
        }
    }

    /// Replace one parameter by name. Setting `p` or `gamma` replaces the policy input.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot: &mut f64 = match self {
            ScenarioSpec::Relative { theta0, lambda, h, policy, r_b, r } => match key {
                "theta0" => theta0,
                "lambda" => lambda,
                "h" => h,
                "r_b" => r_b,
                "r" => r,
                "p" => {
                    *policy = PolicyInput::P(value);
                    return Ok(());
                }
                "gamma" => {
                    *policy = PolicyInput::Gamma(value);
                    return Ok(());
                }
                _ => return Err(Error::validation(key, "not a parameter of the relative scenario form")),
            },
            ScenarioSpec::Absolute(a) => match key {
                "a" => &mut a.a,
                "c_f" => &mut a.c_f,
                "lambda" => &mut a.lambda,
                "h" => &mut a.h,
                "y0" => &mut a.y0,
                "r_b" => &mut a.r_b,
                "p" => &mut a.p,
                "r" => &mut a.r,
                _ => return Err(Error::validation(key, "not a parameter of the absolute scenario form")),
            },
        };
        *slot = value;
        Ok(())
    }

    fn to_value(self) -> Value {
        let mut m = Map::new();
        let mut put = |k: &str, v: f64| {
            m.insert(k.to_string(), number(v));
        };
        match self {
            ScenarioSpec::Relative { theta0, lambda, h, policy, r_b, r } => {
                put("theta0", theta0);
                put("lambda", lambda);
                put("h", h);
                match policy {
                    PolicyInput::P(p) => put("p", p),
                    PolicyInput::Gamma(g) => put("gamma", g),
                }
                put("r_b", r_b);
                put("r", r);
            }
            ScenarioSpec::Absolute(a) => {
                put("a", a.a);
                put("c_f", a.c_f);
                put("lambda", a.lambda);
                put("h", a.h);
                put("y0", a.y0);
                put("r_b", a.r_b);
                put("p", a.p);
                put("r", a.r);
            }
        }
        Value::Object(m)
    }
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Svg,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Svg => "svg",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(Error::validation("output.format", format!("expected csv|svg, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutputOptions {
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSpec,
    pub sampling: Sampling,
    pub output: OutputOptions,
    pub override_bounds: bool,
}

impl ScenarioConfig {
    pub fn bounds(&self) -> Bounds {
        Bounds::from_override(self.override_bounds)
    }

    pub fn build_scenario(&self) -> Result<Scenario> {
        self.scenario.build(self.bounds()).map_err(|e| prefixed("scenario", e))
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("scenario".into(), self.scenario.to_value());
        let mut sampling = Map::new();
        sampling.insert("t_max".into(), number(self.sampling.t_max));
        sampling.insert("dt".into(), number(self.sampling.dt));
        root.insert("sampling".into(), Value::Object(sampling));
        let mut output = Map::new();
        output.insert("format".into(), Value::String(self.output.format.as_str().into()));
        root.insert("output".into(), Value::Object(output));
        root.insert("override_bounds".into(), Value::Bool(self.override_bounds));
        let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("serializing a Value cannot fail");
        text.push('\n');
        text
    }
}

fn object<'a>(value: &'a Value, key: &str) -> Result<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| Error::validation(key, "expected a JSON object"))
}

fn reject_unknown(map: &Map<String, Value>, prefix: &str, allowed: &[&str]) -> Result<()> {
    for k in map.keys() {
        if !allowed.contains(&k.as_str()) {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            return Err(Error::validation(path, "unknown key"));
        }
    }
    Ok(())
}

fn num(map: &Map<String, Value>, prefix: &str, key: &str) -> Result<f64> {
    let path = format!("{prefix}.{key}");
    match map.get(key) {
        None => Err(Error::validation(path, "missing")),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::validation(path, format!("expected a number, got {v}"))),
    }
}

fn parse_scenario(value: &Value) -> Result<ScenarioSpec> {
    let map = object(value, "scenario")?;
    let mut allowed: Vec<&str> = RELATIVE_KEYS.to_vec();
    allowed.extend(ABSOLUTE_KEYS);
    reject_unknown(map, "scenario", &allowed)?;

    let has = |k: &str| map.contains_key(k);
    let relative = has("theta0") || has("gamma");
    let absolute = has("a") || has("c_f") || has("y0");
    if relative && absolute {
        return Err(Error::validation(
            "scenario",
            "conflicting forms: relative keys (theta0, gamma) mixed with absolute keys (a, c_f, y0)",
        ));
    }
    if !relative && !absolute {
        return Err(Error::validation(
            "scenario",
            "cannot tell the form: give theta0 (relative) or a, c_f, y0 (absolute)",
        ));
    }
    if has("p") && has("gamma") {
        return Err(Error::validation("scenario.gamma", "exactly one of p / gamma may be given"));
    }
    if relative {
        let policy = if has("gamma") {
            PolicyInput::Gamma(num(map, "scenario", "gamma")?)
        } else if has("p") {
            PolicyInput::P(num(map, "scenario", "p")?)
        } else {
            return Err(Error::validation("scenario.p", "missing (give p or gamma)"));
        };
        Ok(ScenarioSpec::Relative {
            theta0: num(map, "scenario", "theta0")?,
            lambda: num(map, "scenario", "lambda")?,
            h: num(map, "scenario", "h")?,
            policy,
            r_b: num(map, "scenario", "r_b")?,
            r: num(map, "scenario", "r")?,
        })
    } else {
        Ok(ScenarioSpec::Absolute(AbsoluteParams {
            a: num(map, "scenario", "a")?,
            c_f: num(map, "scenario", "c_f")?,
            lambda: num(map, "scenario", "lambda")?,
            h: num(map, "scenario", "h")?,
            y0: num(map, "scenario", "y0")?,
            r_b: num(map, "scenario", "r_b")?,
            p: num(map, "scenario", "p")?,
            r: num(map, "scenario", "r")?,
        }))
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let map = object(&root, "<root>")?;
    reject_unknown(map, "", &["scenario", "sampling", "output", "override_bounds"])?;

    let scenario = parse_scenario(map.get("scenario").ok_or_else(|| Error::validation("scenario", "missing"))?)?;

    let sampling_v = map.get("sampling").ok_or_else(|| Error::validation("sampling", "missing"))?;
    let sampling_map = object(sampling_v, "sampling")?;
    reject_unknown(sampling_map, "sampling", &["t_max", "dt"])?;
    let sampling = Sampling::new(num(sampling_map, "sampling", "t_max")?, num(sampling_map, "sampling", "dt")?)?;

    let output = match map.get("output") {
        None => OutputOptions::default(),
        Some(v) => {
            let m = object(v, "output")?;
            reject_unknown(m, "output", &["format"])?;
            match m.get("format") {
                None => OutputOptions::default(),
                Some(Value::String(s)) => OutputOptions { format: s.parse()? },
                Some(other) => return Err(Error::validation("output.format", format!("expected a string, got {other}"))),
            }
        }
    };

    let override_bounds = match map.get("override_bounds") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(other) => return Err(Error::validation("override_bounds", format!("expected a boolean, got {other}"))),
    };

    let config = ScenarioConfig { scenario, sampling, output, override_bounds };
    config.build_scenario()?;
    Ok(config)
}

pub const PRESET_NAMES: [&str; 5] = ["fig1-growth", "fig1-low", "fig1-zero", "fig1-negative", "fig2"];

/// Built-in parameter sets: λ = 1/3, h = 0.01, θ₀ = 0.2, p = 2.6, r_b = 0.025 and
/// growth 2.5%, 1%, 0 and −1% per year. `fig2` shares the growth parameters.
pub fn preset(name: &str) -> Result<ScenarioSpec> {
    let r = match name {
        "fig1-growth" | "fig2" => 0.025,
        "fig1-low" => 0.01,
        "fig1-zero" => 0.0,
        "fig1-negative" => -0.01,
        other => {
            return Err(Error::validation(
                "preset",
                format!("unknown preset `{other}` (expected one of {})", PRESET_NAMES.join(", ")),
            ))
        }
    };
    Ok(ScenarioSpec::relative(RelativeParams {
        theta0: 0.2,
        lambda: 1.0 / 3.0,
        h: 0.01,
        p: 2.6,
        r_b: 0.025,
        r,
    }))
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        // normalize -0
        return "0.0".to_string();
    }
    format!("{v:?}")
}

/// A number given on the command line: decimal, `a/b` fraction, or a `%`-suffixed percentage.
pub fn parse_number(text: &str) -> Result<f64> {
    let s = text.trim();
    let bad = |msg: &str| Error::parse(format!("`{text}`"), msg.to_string());
    if s.is_empty() {
        return Err(bad("empty number"));
    }
    let value = if let Some(pct) = s.strip_suffix('%') {
        parse_plain(pct.trim()).ok_or_else(|| bad("invalid percentage"))? / 100.0
    } else if let Some((num, den)) = s.split_once('/') {
        let n = parse_plain(num.trim()).ok_or_else(|| bad("invalid fraction numerator"))?;
        let d = parse_plain(den.trim()).ok_or_else(|| bad("invalid fraction denominator"))?;
        if d == 0.0 {
            return Err(bad("zero denominator"));
        }
        n / d
    } else {
        parse_plain(s).ok_or_else(|| bad("invalid number"))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad("number is not finite"))
    }
}

fn parse_plain(s: &str) -> Option<f64> {
    // f64::from_str accepts "inf"/"nan"; only plain decimal notation is wanted here
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E')) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub const MAX_AXIS_POINTS: usize = 10_000;

/// One sweep axis, `key=v1,v2,...` or `key=start:stop:count`.
pub fn parse_grid_axis(text: &str) -> Result<(String, Vec<f64>)> {
    let (key, rhs) = text
        .split_once('=')
        .ok_or_else(|| Error::parse(format!("`{text}`"), "expected key=values"))?;
    let key = key.trim();
    if key.is_empty() || !key.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        return Err(Error::parse(format!("`{text}`"), "invalid axis key"));
    }
    let rhs = rhs.trim();
    let values = if rhs.contains(':') {
        let parts: Vec<&str> = rhs.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::parse(format!("`{text}`"), "range must be start:stop:count"));
        }
        let start = parse_number(parts[0])?;
        let stop = parse_number(parts[1])?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("`{text}`"), "count must be a positive integer"))?;
        if count == 0 || count > MAX_AXIS_POINTS {
            return Err(Error::parse(format!("`{text}`"), format!("count must lie in 1..={MAX_AXIS_POINTS}")));
        }
        if count == 1 {
            vec![start]
        } else {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { stop } else { start + step * i as f64 })
                .collect()
        }
    } else {
        let vals = rhs.split(',').map(parse_number).collect::<Result<Vec<_>>>()?;
        if vals.len() > MAX_AXIS_POINTS {
            return Err(Error::parse(format!("`{text}`"), "too many values"));
        }
        vals
    };
    Ok((key.to_string(), values))
}

/// Cost series from CSV with header `t,Q,c`. Lines starting with `#` are ignored.
pub fn parse_cost_series(text: &str, label: &str) -> Result<CostSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse("header", e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != ["t", "Q", "c"] {
        return Err(Error::parse("header", format!("expected `t,Q,c`, got `{}`", names.join(","))));
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::parse(format!("row {row_no}"), e.to_string()))?;
        if row.len() != 3 {
            return Err(Error::parse(format!("row {row_no}"), format!("expected 3 fields, got {}", row.len())));
        }
        let field = |j: usize| -> Result<f64> {
            parse_plain(&row[j]).ok_or_else(|| {
                Error::parse(format!("row {row_no}, column {}", names[j]), format!("invalid number `{}`", &row[j]))
            })
        };
        records.push(CostRecord { t: field(0)?, q: field(1)?, c: field(2)? });
    }
    CostSeries::new(label, records)
}

pub fn series_to_csv(series: &CostSeries) -> String {
    let mut out = String::from("t,Q,c\n");
    for r in &series.records {
        let _ = writeln!(out, "{},{},{}", format_number(r.t), format_number(r.q), format_number(r.c));
    }
    out
}

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "y", "Q", "c", "c_ratio", "theta", "E", "epsilon"];

pub(crate) fn trajectory_fields(p: &TrajectoryPoint) -> [f64; 8] {
    [p.t, p.y, p.q, p.c, p.c_ratio, p.theta, p.e, p.epsilon]
}

/// CSV text with the given header; every row is rendered with [`format_number`].
pub fn numeric_csv<'a, I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_trajectory(points: &[TrajectoryPoint], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => {
            let rows: Vec<[f64; 8]> = points.iter().map(trajectory_fields).collect();
            numeric_csv(&TRAJECTORY_HEADER, rows.iter().map(|r| r.as_slice())).into_bytes()
        }
        OutputFormat::Svg => trajectory_svg(points).into_bytes(),
    }
}

/// Line chart of `epsilon` and `c_ratio` against `t`.
pub fn trajectory_svg(points: &[TrajectoryPoint]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 50.0;

    let t_max = points.iter().map(|p| p.t).fold(0.0, f64::max).max(1e-12);
    let y_hi = points
        .iter()
        .flat_map(|p| [p.epsilon, p.c_ratio])
        .filter(|v| v.is_finite())
        .fold(1.0, f64::max);
    let y_max = (y_hi * 10.0).ceil() / 10.0;
    let x = |t: f64| LEFT + (W - LEFT - RIGHT) * t / t_max;
    let y = |v: f64| H - BOTTOM - (H - TOP - BOTTOM) * v / y_max;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{:.2},{:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        LEFT,
        TOP,
        H - BOTTOM,
        W - RIGHT
    );
    for i in 0..=5 {
        let v = y_max * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.2}</text>"#,
            LEFT - 6.0,
            y(v) + 4.0,
            v
        );
        let t = t_max * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.1}</text>"#,
            x(t),
            H - BOTTOM + 18.0,
            t
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t (years)</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 10.0
    );
    for (name, color, pick) in [
        ("epsilon", "#c0392b", (|p: &TrajectoryPoint| p.epsilon) as fn(&TrajectoryPoint) -> f64),
        ("c_ratio", "#2471a3", |p: &TrajectoryPoint| p.c_ratio),
    ] {
        let coords: Vec<String> = points
            .iter()
            .filter(|p| pick(p).is_finite())
            .map(|p| format!("{:.2},{:.2}", x(p.t), y(pick(p))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"><title>{name}</title></polyline>"#,
            coords.join(" ")
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" fill="#c0392b">epsilon</text>"##,
        W - RIGHT - 110.0,
        TOP + 14.0
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" fill="#2471a3">c_ratio</text>"##,
        W - RIGHT - 110.0,
        TOP + 30.0
    );
    s.push_str("</svg>\n");
    s
}
