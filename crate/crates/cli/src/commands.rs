use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{self, Write};

use gepi_core::applications::{
    broadcast_region, broadcast_region_gaussian, helper_region, scalar_mgl_suite,
    vector_mgl_suite, BroadcastSpec, MonteCarloConfig, RateRegionBoundary,
};
use gepi_core::group::{probs_from_literals, GroupDescriptor, ProbLiteral};
use gepi_core::lemmas::verify_all;
use gepi_core::numeric::{
    convexity_scan, min_sum_entropy, uniform_grid, MinimizationConfig, ScanConfig,
};
use gepi_core::{f_group, f_group_k, map_slice, EpiError, Execution, FiniteAbelianGroup, GroupDistribution};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::{
    CheckArgs, CheckKind, Cli, Command, EvalArgs, Format, OracleArgs, RegionArgs, RegionKind, Unit,
};
use crate::output::{fmt_sig, open, write_csv, write_json};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(EpiError),
    Io(io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Json(e) => write!(f, "invalid JSON: {e}"),
        }
    }
}

impl From<EpiError> for CliError {
    fn from(e: EpiError) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Whether a check found a violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Violation,
}

pub fn run(cli: &Cli) -> Result<Verdict> {
    match &cli.command {
        Command::Eval(a) => eval(cli, a),
        Command::Oracle(a) => oracle(cli, a),
        Command::Region(a) => region(cli, a),
        Command::Check(a) => check(cli, a),
    }
    .map(|v| v.unwrap_or(Verdict::Pass))
}

fn parse_group(s: &str) -> Result<FiniteAbelianGroup> {
    Ok(FiniteAbelianGroup::parse(s)?)
}

fn eval(cli: &Cli, a: &EvalArgs) -> Result<Option<Verdict>> {
    let g = parse_group(&a.group)?;
    let xs: Vec<f64> = match (a.x, a.y) {
        (Some(x), Some(y)) => vec![x, y],
        _ => a.xs.clone(),
    };
    let nats: Vec<f64> = xs.iter().map(|&v| cli.unit.to_nats(v)).collect();
    let value = if nats.len() == 2 {
        f_group(&g, nats[0], nats[1])?
    } else {
        f_group_k(&g, &nats)?
    };
    let value = cli.unit.nats_in_unit(value);
    let mut out = open(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => writeln!(out, "{}", fmt_sig(value))?,
        Format::Json => write_json(&mut out, json!({"group": g.to_string(), "xs": xs, "value": value}))?,
    }
    out.flush()?;
    Ok(None)
}

fn minimization_config(
    exec: Execution,
    seed: u64,
    restarts: usize,
    iterations: usize,
    structured: bool,
) -> MinimizationConfig {
    MinimizationConfig {
        seed,
        restarts,
        max_iterations: iterations,
        structured_starts: structured,
        execution: exec,
        ..Default::default()
    }
}

fn oracle(cli: &Cli, a: &OracleArgs) -> Result<Option<Verdict>> {
    if a.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let g = parse_group(&a.group)?;
    let o = &a.optimizer;
    // Grid points fan out, so each optimization runs sequentially.
    let cfg = minimization_config(Execution::Sequential, o.seed, o.restarts, o.iterations, !o.random_starts_only);
    cfg.validate()?;
    let axis = uniform_grid(g.log_order(), a.points - 1);
    let grid: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| (x, y)))
        .collect();
    let results = map_slice(cli.execution(), &grid, |&(x, y)| {
        let numeric = min_sum_entropy(&g, x, y, &cfg)?.value;
        let closed = match g.two_exponent() {
            Some(_) => Some(f_group(&g, x, y)?),
            None => None,
        };
        Ok::<_, EpiError>((numeric, closed))
    });
    let u = cli.unit;
    let mut max_gap: Option<f64> = None;
    let mut rows = Vec::with_capacity(grid.len());
    for (&(x, y), r) in grid.iter().zip(results) {
        let (numeric, closed) = r?;
        let gap = closed.map(|c| numeric - c);
        if let Some(d) = gap {
            max_gap = Some(max_gap.unwrap_or(0.0).max(d.abs()));
        }
        rows.push((u.nats_in_unit(x), u.nats_in_unit(y), closed.map(|c| u.nats_in_unit(c)), u.nats_in_unit(numeric), gap.map(|d| u.nats_in_unit(d))));
    }
    let max_gap = max_gap.map(|d| u.nats_in_unit(d));
    let mut out = open(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|&(x, y, c, n, d)| vec![fmt_sig(x), fmt_sig(y), opt(c), fmt_sig(n), opt(d)])
                .collect();
            write_csv(&mut out, &["x", "y", "closed_form", "numeric", "gap"], &table)?;
        }
        Format::Json => {
            let table: Vec<Value> = rows
                .iter()
                .map(|&(x, y, c, n, d)| json!({"x": x, "y": y, "closed_form": c, "numeric": n, "gap": d}))
                .collect();
            write_json(&mut out, json!({"group": g.to_string(), "rows": table, "max_abs_gap": max_gap}))?;
        }
    }
    out.flush()?;
    match max_gap {
        Some(d) => eprintln!("max |gap| = {} over {} points", fmt_sig(d), grid.len()),
        None => eprintln!("no closed form for {g}; numeric values only"),
    }
    Ok(None)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GroupField {
    Text(String),
    Descriptor(GroupDescriptor),
}

/// Region spec file: the group plus whichever noise distributions the region
/// kind needs, each a list of probabilities (numbers or decimal strings).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionSpecFile {
    group: GroupField,
    p_z1: Option<Vec<ProbLiteral>>,
    p_z2_tilde: Option<Vec<ProbLiteral>>,
    p_z2: Option<Vec<ProbLiteral>>,
    p_z: Option<Vec<ProbLiteral>>,
}

impl RegionSpecFile {
    fn group(&self) -> Result<FiniteAbelianGroup> {
        match &self.group {
            GroupField::Text(s) => parse_group(s),
            GroupField::Descriptor(d) => Ok(FiniteAbelianGroup::new(d.cyclic_orders.clone())?),
        }
    }

    fn dist(&self, g: &FiniteAbelianGroup, field: &str) -> Result<GroupDistribution> {
        let probs = match field {
            "p_z1" => &self.p_z1,
            "p_z2_tilde" => &self.p_z2_tilde,
            "p_z2" => &self.p_z2,
            _ => &self.p_z,
        };
        let probs = probs
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("spec file is missing '{field}'")))?;
        Ok(probs_from_literals(g, probs)?)
    }
}

fn alpha_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(CliError::Usage("--alpha-points must be at least 2".into()));
    }
    Ok((0..points).map(|i| 0.5 * i as f64 / (points - 1) as f64).collect())
}

fn region(cli: &Cli, a: &RegionArgs) -> Result<Option<Verdict>> {
    let text = fs::read_to_string(&a.spec)?;
    let spec: RegionSpecFile = serde_json::from_str(&text)?;
    let g = spec.group()?;
    let n = g
        .two_exponent()
        .filter(|_| g.cyclic_orders().len() == 1)
        .ok_or_else(|| EpiError::UnsupportedGroup(format!("{g}: regions need a cyclic 2-group")))?
        as usize;
    let grid = alpha_grid(a.alpha_points)?;
    let boundary: RateRegionBoundary = match a.kind {
        RegionKind::Broadcast => {
            let s = BroadcastSpec::new(n, spec.dist(&g, "p_z1")?, spec.dist(&g, "p_z2_tilde")?)?;
            broadcast_region(&s, &grid)?
        }
        RegionKind::BroadcastGaussian => {
            broadcast_region_gaussian(n, &spec.dist(&g, "p_z1")?, &spec.dist(&g, "p_z2")?, &grid)?
        }
        RegionKind::Helper => helper_region(n, &spec.dist(&g, "p_z")?, &grid)?,
    };
    let u = cli.unit;
    let mut out = open(cli.output.as_deref())?;
    match cli.format {
        Format::Csv => {
            let table: Vec<Vec<String>> = boundary
                .points
                .iter()
                .map(|p| {
                    vec![
                        fmt_sig(p.alpha),
                        fmt_sig(u.nats_in_unit(p.r1)),
                        fmt_sig(u.nats_in_unit(p.r2)),
                        p.clamped.to_string(),
                        fmt_sig(u.nats_in_unit(p.equality_residual)),
                    ]
                })
                .collect();
            write_csv(&mut out, &["alpha", "r1", "r2", "clamped", "equality_residual"], &table)?;
        }
        Format::Json => {
            let mut v = serde_json::to_value(&boundary)?;
            scale_fields(&mut v, u, &["r1", "r2", "equality_residual"]);
            write_json(&mut out, v)?;
        }
    }
    out.flush()?;
    Ok(None)
}

/// Rescales every number under the named keys, at any depth.
fn scale_fields(v: &mut Value, unit: Unit, keys: &[&str]) {
    let keys: HashSet<&str> = keys.iter().copied().collect();
    fn scale_all(v: &mut Value, unit: Unit) {
        match v {
            Value::Number(n) => {
                if let Some(x) = n.as_f64() {
                    if let Some(s) = serde_json::Number::from_f64(unit.nats_in_unit(x)) {
                        *n = s;
                    }
                }
            }
            Value::Array(items) => items.iter_mut().for_each(|i| scale_all(i, unit)),
            Value::Object(map) => map.values_mut().for_each(|i| scale_all(i, unit)),
            _ => {}
        }
    }
    fn walk(v: &mut Value, unit: Unit, keys: &HashSet<&str>) {
        match v {
            Value::Array(items) => items.iter_mut().for_each(|i| walk(i, unit, keys)),
            Value::Object(map) => {
                for (k, item) in map.iter_mut() {
                    if keys.contains(k.as_str()) {
                        scale_all(item, unit);
                    } else {
                        walk(item, unit, keys);
                    }
                }
            }
            _ => {}
        }
    }
    if unit != Unit::Nats {
        walk(v, unit, &keys);
    }
}

fn single_group(groups: &[String], default: &str) -> Result<FiniteAbelianGroup> {
    match groups {
        [] => parse_group(default),
        [g] => parse_group(g),
        _ => Err(CliError::Usage("this check takes a single --group".into())),
    }
}

fn verdict(passed: bool) -> Verdict {
    if passed {
        Verdict::Pass
    } else {
        Verdict::Violation
    }
}

fn check(cli: &Cli, a: &CheckArgs) -> Result<Option<Verdict>> {
    if a.tolerance.is_nan() || a.tolerance <= 0.0 {
        return Err(CliError::Usage("--tolerance must be positive".into()));
    }
    let exec = cli.execution();
    let (mut report, passed) = match a.kind {
        CheckKind::MglScalar => {
            let names: Vec<String> = if a.group.is_empty() {
                ["z4", "z8", "z2xz4"].map(String::from).to_vec()
            } else {
                a.group.clone()
            };
            let groups = names.iter().map(|s| parse_group(s)).collect::<Result<Vec<_>>>()?;
            let cfg = MonteCarloConfig { trials: a.trials.unwrap_or(10_000), seed: a.seed, execution: exec };
            let r = scalar_mgl_suite(&groups, &cfg)?;
            let passed = r.passed();
            let mut v = serde_json::to_value(&r)?;
            scale_fields(&mut v, cli.unit, &["min_slack", "tolerance"]);
            (v, passed)
        }
        CheckKind::MglVector => {
            let g = single_group(&a.group, "z4")?;
            let cfg = MonteCarloConfig { trials: a.trials.unwrap_or(1_000), seed: a.seed, execution: exec };
            let r = vector_mgl_suite(&g, a.block_length, &cfg)?;
            let passed = r.passed();
            let mut v = serde_json::to_value(&r)?;
            scale_fields(&mut v, cli.unit, &["min_slack", "tolerance"]);
            (v, passed)
        }
        CheckKind::Convexity => {
            let g = single_group(&a.group, "z3")?;
            let max = g.log_order();
            let axis = uniform_grid(max, a.resolution);
            let m = a.fixed_points.max(1);
            let fixed: Vec<f64> = (1..=m).map(|j| max * j as f64 / (m + 1) as f64).collect();
            let cfg = ScanConfig {
                minimization: minimization_config(exec, a.seed, a.restarts, a.iterations, true),
                tolerance: cli.unit.to_nats(a.tolerance),
                ..Default::default()
            };
            let r = convexity_scan(&g, &axis, &fixed, &cfg)?;
            let passed = r.consistent();
            let mut v = serde_json::to_value(&r)?;
            scale_fields(
                &mut v,
                cli.unit,
                &["axis", "fixed", "values", "min_second_difference", "tolerance", "xs", "second_difference"],
            );
            (v, passed)
        }
        CheckKind::Lemmas => {
            let reports = verify_all(a.grid_size)?;
            let passed = reports.iter().all(|r| r.passed);
            for r in &reports {
                eprintln!(
                    "{:<22} {:<4} max violation {}",
                    serde_json::to_value(r.claim)?.as_str().unwrap_or_default(),
                    if r.passed { "PASS" } else { "FAIL" },
                    fmt_sig(r.max_violation)
                );
            }
            (json!({"grid_size": a.grid_size, "claims": reports}), passed)
        }
    };
    if let Value::Object(map) = &mut report {
        map.insert("passed".into(), Value::Bool(passed));
        map.insert("unit".into(), json!(format!("{:?}", cli.unit).to_lowercase()));
    }
    let mut out = open(cli.output.as_deref())?;
    write_json(&mut out, report)?;
    out.flush()?;
    Ok(Some(verdict(passed)))
}
