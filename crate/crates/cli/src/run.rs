//! Executes a validated [`Command`].

use std::path::Path;

use serde::Serialize;

use frobtrace::bounds::{bound_rows, linear_grid, write_bounds_csv};
use frobtrace::curve::{parse_catalog, trace_with_seed, Curve, TraceCache, TraceMethod};
use frobtrace::group_lab::{verify_lemma, LemmaParams};
use frobtrace::survey::{
    build_report, write_histogram_csv, write_per_ell_csv, EllQuery, SurveyConfig, SurveyQuery,
    TraceTable,
};

use crate::args::{BoundsCmd, Command, GroupVerifyCmd, Invocation, SurveyCmd, TraceCmd};
use crate::manifest::{to_json, write_file, write_sidecar, ManifestBuilder};
use crate::{combine, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutFormat {
    Json,
    Csv,
}

pub fn out_format(path: &Path) -> Result<OutFormat, CliError> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("json") => Ok(OutFormat::Json),
        Some("csv") => Ok(OutFormat::Csv),
        _ => Err(CliError::Usage(format!(
            "out: expected a .json or .csv path, got {}",
            path.display()
        ))),
    }
}

/// Returns the exit code: 0, or 1 when a verification fails.
pub fn execute(inv: &Invocation) -> Result<i32, CliError> {
    let manifest = ManifestBuilder::start(inv);
    match &inv.command {
        Command::GroupVerify(c) => group_verify(c, manifest),
        Command::Trace(c) => trace(c, manifest),
        Command::Survey(c) => survey(c, manifest),
        Command::Bounds(c) => bounds(c, manifest),
        Command::Report(c) => combine::report(c, manifest),
    }
}

fn require_json(path: &Path) -> Result<(), CliError> {
    match out_format(path)? {
        OutFormat::Json => Ok(()),
        OutFormat::Csv => Err(CliError::Usage(format!(
            "out: this subcommand writes JSON, got {}",
            path.display()
        ))),
    }
}

fn group_verify(c: &GroupVerifyCmd, manifest: ManifestBuilder) -> Result<i32, CliError> {
    require_json(&c.out)?;
    let report = verify_lemma(
        c.lemma,
        c.ell,
        c.g,
        LemmaParams {
            t: c.t,
            z: c.z,
            xi: c.xi,
        },
    )?;
    write_file(&c.out, &to_json(&manifest.finish(), &report)?)?;
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    println!("{} ell={} g={}: {verdict}", c.lemma.as_str(), c.ell, c.g);
    if let Some(cx) = &report.counterexample {
        println!("counterexample: {cx}");
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn load_catalog(path: &Path, manifest: &mut ManifestBuilder) -> Result<Vec<Curve>, CliError> {
    let bytes = manifest.read_input(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Usage(format!("catalog {} is not UTF-8", path.display())))?;
    let curves = parse_catalog(&text)?;
    if curves.is_empty() {
        return Err(CliError::Usage(format!(
            "catalog {} lists no curves",
            path.display()
        )));
    }
    Ok(curves)
}

#[derive(Serialize)]
struct CurveTrace {
    label: String,
    good: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    a_p: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<TraceMethod>,
    fell_back: bool,
}

#[derive(Serialize)]
struct TraceResult {
    p: u64,
    traces: Vec<CurveTrace>,
    /// `a_{1,p}`; absent when some curve has bad reduction at p.
    #[serde(skip_serializing_if = "Option::is_none")]
    a1p: Option<i64>,
}

fn trace(c: &TraceCmd, mut manifest: ManifestBuilder) -> Result<i32, CliError> {
    if let Some(out) = &c.out {
        require_json(out)?;
    }
    let curves = load_catalog(&c.curves, &mut manifest)?;
    let mut traces = Vec::with_capacity(curves.len());
    for curve in &curves {
        let entry = if curve.is_good(c.p) {
            let o = trace_with_seed(curve, c.p, c.method, c.seed)?;
            CurveTrace {
                label: curve.label().into(),
                good: true,
                a_p: Some(o.a_p),
                method: Some(o.method),
                fell_back: o.fell_back,
            }
        } else {
            CurveTrace {
                label: curve.label().into(),
                good: false,
                a_p: None,
                method: None,
                fell_back: false,
            }
        };
        traces.push(entry);
    }
    let a1p = traces.iter().map(|t| t.a_p).sum::<Option<i64>>();
    let result = TraceResult {
        p: c.p,
        traces,
        a1p,
    };
    let bytes = to_json(&manifest.finish(), &result)?;
    match &c.out {
        Some(out) => write_file(out, &bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::io("cannot write to stdout", e))?;
        }
    }
    Ok(0)
}

fn survey(c: &SurveyCmd, mut manifest: ManifestBuilder) -> Result<i32, CliError> {
    let format = out_format(&c.out)?;
    let curves = load_catalog(&c.curves, &mut manifest)?;
    let cfg = SurveyConfig::new(curves, c.x)?
        .with_threads(c.threads)
        .with_epsilon(c.eps)
        .with_method(c.method)
        .with_seed(c.seed);
    let table = match &c.cache {
        Some(path) => TraceTable::compute_cached(&cfg, &mut TraceCache::open(path)?)?,
        None => TraceTable::compute(&cfg)?,
    };
    let mut query = SurveyQuery::new(c.target).with_grid_steps(c.grid_steps);
    query.probe_bound = c.probe;
    if let Some(ell) = c.ell {
        query = query.with_ell(ell);
    }
    let report = build_report(&cfg, &table, &query)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let manifest = manifest.finish();
    match format {
        OutFormat::Json => write_file(&c.out, &to_json(&manifest, &report)?)?,
        OutFormat::Csv => {
            let mut buf = Vec::new();
            match (&report.max_survey, c.ell) {
                (Some(ms), _) => write_per_ell_csv(&ms.per_ell, &mut buf)?,
                (None, Some(EllQuery::Single(l))) => {
                    write_per_ell_csv(&[(l, report.counts["pi_ell"])], &mut buf)?
                }
                _ => write_histogram_csv(&table.histogram(), &mut buf)?,
            }
            write_file(&c.out, &buf)?;
            write_sidecar(&c.out, &manifest)?;
        }
    }
    Ok(0)
}

fn bounds(c: &BoundsCmd, manifest: ManifestBuilder) -> Result<i32, CliError> {
    let format = out_format(&c.out)?;
    let grid = linear_grid(c.a, c.b, c.steps)?;
    let rows = bound_rows(&grid, c.g, c.t0, c.constant, c.eps)?;
    let manifest = manifest.finish();
    match format {
        OutFormat::Json => write_file(&c.out, &to_json(&manifest, &rows)?)?,
        OutFormat::Csv => {
            let mut buf = Vec::new();
            write_bounds_csv(&rows, &mut buf)?;
            write_file(&c.out, &buf)?;
            write_sidecar(&c.out, &manifest)?;
        }
    }
    Ok(0)
}
