use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Dataset, Variable};
use crate::simulation::{SimRecord, SummaryRecord};

/// Reads a CSV file with a header row. Without a schema, levels are taken
/// in order of first appearance; with one, every column must be described
/// by it and every cell must be one of its levels.
pub fn read_csv<R: Read>(reader: R, schema: Option<&[Variable]>) -> Result<Dataset> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Data("CSV input is empty".into()));
    }
    let p = header.len();
    let known: Option<Vec<&Variable>> = schema
        .map(|s| {
            header
                .iter()
                .map(|h| {
                    s.iter()
                        .find(|v| &v.name == h)
                        .ok_or_else(|| Error::Schema(format!("column {h:?} is not in the schema")))
                })
                .collect::<Result<_>>()
        })
        .transpose()?;
    let mut seen: Vec<HashMap<String, usize>> = vec![HashMap::new(); p];
    let mut levels: Vec<Vec<String>> = vec![Vec::new(); p];
    let mut codes = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |pos| pos.line());
        for (j, cell) in rec.iter().enumerate() {
            let code = match &known {
                Some(vars) => vars[j].level_code(cell).ok_or_else(|| {
                    Error::Data(format!(
                        "line {line}, column {:?}: label {cell:?} is not a level in the schema",
                        header[j]
                    ))
                })?,
                None => *seen[j].entry(cell.to_string()).or_insert_with(|| {
                    levels[j].push(cell.to_string());
                    levels[j].len() - 1
                }),
            };
            codes.push(code);
        }
    }
    if codes.is_empty() {
        return Err(Error::Data("CSV input has no data rows".into()));
    }
    let variables = match known {
        Some(vars) => vars.into_iter().cloned().collect(),
        None => header
            .into_iter()
            .zip(levels)
            .map(|(name, lv)| {
                if lv.len() < 2 {
                    Err(Error::Schema(format!(
                        "column {name:?} has a single level; supply a schema listing its levels"
                    )))
                } else {
                    Ok(Variable { name, levels: lv })
                }
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Dataset::from_codes(variables, codes)
}

pub fn read_csv_path(path: impl AsRef<Path>, schema: Option<&[Variable]>) -> Result<Dataset> {
    read_csv(File::open(path)?, schema)
}

/// Writes labels with a header row.
pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(writer);
    w.write_record(data.variables().iter().map(|v| v.name.as_str()))?;
    for row in data.rows() {
        w.write_record(row.iter().zip(data.variables()).map(|(&c, v)| v.levels[c].as_str()))?;
    }
    w.flush()?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Long-format simulation results, one row per estimator run.
pub fn write_results_csv<W: Write>(records: &[SimRecord], writer: W) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(writer);
    w.write_record([
        "generator", "pi", "dist", "n", "rep", "estimator", "abs_error", "runtime_ms", "estimate", "true_ate", "status",
    ])?;
    for r in records {
        w.write_record([
            r.generator.name().to_string(),
            r.pi.to_string(),
            r.dist.name().to_string(),
            r.n.to_string(),
            r.rep.to_string(),
            r.estimator.name().to_string(),
            opt(r.abs_error),
            r.runtime_ms.to_string(),
            opt(r.estimate),
            r.true_ate.to_string(),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(records: &[SummaryRecord], writer: W) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(writer);
    w.write_record(["generator", "pi", "dist", "n", "estimator", "median_abs_error", "n_ok", "n_failed"])?;
    for r in records {
        w.write_record([
            r.generator.name().to_string(),
            r.pi.to_string(),
            r.dist.name().to_string(),
            r.n.to_string(),
            r.estimator.name().to_string(),
            opt(r.median_abs_error),
            r.n_ok.to_string(),
            r.n_failed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
