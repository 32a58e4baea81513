//! The `report` subcommand: survey series side by side with the bounds.
//!
//! Inputs are survey JSON documents. Grids are reconciled by exact subsetting
//! onto the coarsest one; no value is interpolated or extrapolated.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use frobtrace::bounds::{theorem1_bound, torus_variant_bound, BoundQuery};

use crate::args::ReportCmd;
use crate::manifest::{to_json, write_file, write_sidecar, ManifestBuilder};
use crate::run::{out_format, OutFormat};
use crate::CliError;

/// One input's cumulative counts, grid ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub g: usize,
    pub target: Value,
    pub points: Vec<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Combined {
    pub columns: Vec<String>,
    pub rows: Vec<CombinedRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombinedRow {
    pub x: u64,
    pub pi: Vec<u64>,
    pub bound: f64,
    pub torus_bound: f64,
}

fn schema(name: &str, what: &str) -> CliError {
    CliError::Usage(format!("{name}: not a survey JSON output ({what})"))
}

/// Extracts the series from a survey JSON document.
pub fn parse_series(name: &str, text: &str) -> Result<Series, CliError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| schema(name, &e.to_string()))?;
    if doc.pointer("/manifest/subcommand").and_then(Value::as_str) != Some("survey") {
        return Err(schema(name, "manifest.subcommand is not survey"));
    }
    let params = doc
        .pointer("/result/parameters")
        .ok_or_else(|| schema(name, "missing result.parameters"))?;
    let g = params
        .get("g")
        .and_then(Value::as_u64)
        .ok_or_else(|| schema(name, "missing g"))? as usize;
    let target = params
        .get("target")
        .cloned()
        .ok_or_else(|| schema(name, "missing target"))?;
    let series = doc
        .pointer("/result/series")
        .and_then(Value::as_array)
        .ok_or_else(|| schema(name, "missing series"))?;
    let mut points = Vec::with_capacity(series.len());
    for p in series {
        let x = p
            .get("x")
            .and_then(Value::as_u64)
            .ok_or_else(|| schema(name, "series point without x"))?;
        let pi = p
            .get("pi")
            .and_then(Value::as_u64)
            .ok_or_else(|| schema(name, "series point without pi"))?;
        if points.last().is_some_and(|&(prev, _)| prev >= x) {
            return Err(CliError::Usage(format!(
                "{name}: non-monotone x grid at x = {x}"
            )));
        }
        points.push((x, pi));
    }
    if points.is_empty() {
        return Err(schema(name, "empty series"));
    }
    Ok(Series {
        name: name.to_string(),
        g,
        target,
        points,
    })
}

/// Aligns the inputs on the coarsest grid, truncated to the smallest surveyed x.
pub fn combine(inputs: &[Series]) -> Result<Combined, CliError> {
    let first = inputs
        .first()
        .ok_or_else(|| CliError::Usage("report needs at least one input".into()))?;
    for s in &inputs[1..] {
        if s.g != first.g {
            return Err(CliError::Usage(format!(
                "{}: g = {} but {} has g = {}",
                s.name, s.g, first.name, first.g
            )));
        }
        if s.target != first.target {
            return Err(CliError::Usage(format!(
                "{}: target differs from {}",
                s.name, first.name
            )));
        }
    }
    let x_max = inputs
        .iter()
        .map(|s| s.points.last().expect("nonempty").0)
        .min()
        .expect("nonempty");
    let grids: Vec<BTreeSet<u64>> = inputs
        .iter()
        .map(|s| {
            s.points
                .iter()
                .map(|p| p.0)
                .filter(|&x| x <= x_max)
                .collect()
        })
        .collect();
    let coarse = grids.iter().min_by_key(|g| g.len()).expect("nonempty");
    for (s, grid) in inputs.iter().zip(&grids) {
        if !coarse.is_subset(grid) {
            return Err(CliError::Usage(format!(
                "{}: x grid does not contain the coarsest grid; resampling would need interpolation",
                s.name
            )));
        }
    }
    let t_is_zero = first.target == serde_json::json!({ "exact": 0 });
    let mut rows = Vec::with_capacity(coarse.len());
    for &x in coarse {
        let pi = inputs
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .find(|p| p.0 == x)
                    .expect("subset checked")
                    .1
            })
            .collect();
        let xf = x as f64;
        rows.push(CombinedRow {
            x,
            pi,
            bound: theorem1_bound(&BoundQuery::new(xf, first.g, t_is_zero, 1.0)?),
            torus_bound: torus_variant_bound(xf, first.g)?,
        });
    }
    let mut columns = vec!["x".to_string()];
    if inputs.len() == 1 {
        columns.push("pi".into());
    } else {
        columns.extend((1..=inputs.len()).map(|i| format!("pi_{i}")));
    }
    columns.extend(["bound".to_string(), "torus_bound".to_string()]);
    Ok(Combined { columns, rows })
}

pub fn write_combined_csv<W: std::io::Write>(c: &Combined, out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| CliError::Core(e.into());
    w.write_record(&c.columns).map_err(csv_err)?;
    for r in &c.rows {
        let mut rec = vec![r.x.to_string()];
        rec.extend(r.pi.iter().map(u64::to_string));
        rec.push(r.bound.to_string());
        rec.push(r.torus_bound.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("cannot write CSV", e))
}

fn display_name(path: &Path) -> String {
    path.display().to_string()
}

pub fn report(c: &ReportCmd, mut manifest: ManifestBuilder) -> Result<i32, CliError> {
    let format = out_format(&c.out)?;
    let mut inputs = Vec::with_capacity(c.inputs.len());
    for path in &c.inputs {
        let name = display_name(path);
        let bytes = manifest.read_input(path)?;
        let text = std::str::from_utf8(&bytes).map_err(|_| schema(&name, "not UTF-8"))?;
        inputs.push(parse_series(&name, text)?);
    }
    let combined = combine(&inputs)?;
    let manifest = manifest.finish();
    match format {
        OutFormat::Json => write_file(&c.out, &to_json(&manifest, &combined)?)?,
        OutFormat::Csv => {
            let mut buf = Vec::new();
            write_combined_csv(&combined, &mut buf)?;
            write_file(&c.out, &buf)?;
            write_sidecar(&c.out, &manifest)?;
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn series(name: &str, points: &[(u64, u64)]) -> Series {
        Series {
            name: name.into(),
            g: 2,
            target: json!({ "exact": 0 }),
            points: points.to_vec(),
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(combine(&[]).is_err());
    }

    #[test]
    fn single_input_echoes() {
        let s = series("a", &[(100, 3), (200, 5)]);
        let c = combine(std::slice::from_ref(&s)).unwrap();
        assert_eq!(c.columns, ["x", "pi", "bound", "torus_bound"]);
        assert_eq!(
            c.rows.iter().map(|r| (r.x, r.pi[0])).collect::<Vec<_>>(),
            s.points
        );
    }

    #[test]
    fn resamples_to_coarser_grid_by_subsetting() {
        let fine = series("fine", &[(50, 1), (100, 3), (150, 4), (200, 5)]);
        let coarse = series("coarse", &[(100, 7), (200, 9)]);
        let c = combine(&[fine, coarse]).unwrap();
        assert_eq!(
            c.rows
                .iter()
                .map(|r| (r.x, r.pi.clone()))
                .collect::<Vec<_>>(),
            vec![(100, vec![3, 7]), (200, vec![5, 9])]
        );
    }

    #[test]
    fn never_extrapolates() {
        let long = series("long", &[(100, 1), (200, 2), (300, 3)]);
        let short = series("short", &[(100, 5), (200, 6)]);
        let c = combine(&[long, short]).unwrap();
        assert_eq!(c.rows.last().unwrap().x, 200);
    }

    #[test]
    fn rejects_unnested_grids_and_mismatches() {
        let a = series("a", &[(100, 1), (200, 2)]);
        let b = series("b", &[(150, 1), (200, 2)]);
        assert!(combine(&[a.clone(), b]).is_err());
        let mut g1 = a.clone();
        g1.g = 1;
        assert!(combine(&[a.clone(), g1]).is_err());
        let mut other = a.clone();
        other.target = json!({ "exact": 2 });
        assert!(combine(&[a, other]).is_err());
    }

    #[test]
    fn rejects_non_monotone_series() {
        let doc = json!({
            "manifest": { "subcommand": "survey" },
            "result": { "parameters": { "g": 1, "target": { "exact": 0 } },
                        "series": [ { "x": 200, "pi": 1 }, { "x": 100, "pi": 2 } ] }
        });
        let err = parse_series("bad", &doc.to_string()).unwrap_err();
        assert!(err.to_string().contains("non-monotone"));
        assert!(parse_series("csv", "x,pi\n1,2\n").is_err());
    }
}
