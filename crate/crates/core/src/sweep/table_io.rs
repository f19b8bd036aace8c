//! CSV and gnuplot serialization of sweep tables.
//!
//! A single table uses the header
//! `axis,ReEpsT,ImEpsT,ReNr,ImNr,ReNg,ImNg,DragM,branch,flag` where the
//! first column is named after the axis. A family of curves sharing one
//! grid is written wide: every column after the first carries a
//! `[label]` suffix. Numbers are written with 17 significant digits;
//! failed rows leave their numeric cells empty.

use std::io::{Read, Write};

use num_complex::Complex64;
use thiserror::Error;

use super::{Axis, Row, RowFailure, RowValues, SpectrumTable};
use crate::steady::Branch;

pub const VALUE_COLUMNS: [&str; 9] = [
    "ReEpsT", "ImEpsT", "ReNr", "ImNr", "ReNg", "ImNg", "DragM", "branch", "flag",
];

#[derive(Debug, Error)]
pub enum TableIoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("schema mismatch: {0}")]
    Schema(String),
}

fn schema<T>(msg: impl Into<String>) -> Result<T, TableIoError> {
    Err(TableIoError::Schema(msg.into()))
}

/// One labelled table of a family. Unlabelled when written alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: Option<String>,
    pub table: SpectrumTable,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn value_cells(row: &Row) -> [String; 9] {
    let branch = row.branch.map(Branch::as_str).unwrap_or("").to_string();
    match &row.outcome {
        Ok(v) => [
            fmt(v.eps_t.re),
            fmt(v.eps_t.im),
            fmt(v.n_r.re),
            fmt(v.n_r.im),
            fmt(v.n_g.re),
            fmt(v.n_g.im),
            v.drag.map(fmt).unwrap_or_default(),
            branch,
            "ok".to_string(),
        ],
        Err(f) => {
            let mut cells: [String; 9] = Default::default();
            cells[7] = branch;
            cells[8] = f.as_str().to_string();
            cells
        }
    }
}

fn check_family(curves: &[Curve]) -> Result<(), TableIoError> {
    let Some(first) = curves.first() else {
        return schema("no curves to write");
    };
    if curves.len() > 1 && curves.iter().any(|c| c.label.is_none()) {
        return schema("every curve of a family needs a label");
    }
    for c in curves {
        if c.table.axis != first.table.axis
            || c.table.rows.len() != first.table.rows.len()
            || c.table
                .rows
                .iter()
                .zip(&first.table.rows)
                .any(|(a, b)| a.axis_value != b.axis_value)
        {
            return schema("curves of a family must share the same axis grid");
        }
    }
    Ok(())
}

fn header(curves: &[Curve]) -> Vec<String> {
    let mut h = vec![curves[0].table.axis.column_name().to_string()];
    for c in curves {
        for col in VALUE_COLUMNS {
            h.push(match &c.label {
                Some(l) => format!("{col}[{l}]"),
                None => col.to_string(),
            });
        }
    }
    h
}

pub fn write_csv<W: Write>(out: W, curves: &[Curve]) -> Result<(), TableIoError> {
    check_family(curves)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(curves))?;
    for i in 0..curves[0].table.rows.len() {
        let mut record = vec![fmt(curves[0].table.rows[i].axis_value)];
        for c in curves {
            record.extend(value_cells(&c.table.rows[i]));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated data file and a matching plot script.
///
/// `data_name` is the file name the script should read.
pub fn write_gnuplot<D: Write, S: Write>(
    mut data: D,
    mut script: S,
    curves: &[Curve],
    data_name: &str,
    ycolumn: Option<&str>,
) -> Result<(), TableIoError> {
    check_family(curves)?;
    writeln!(data, "# {}", header(curves).join(" "))?;
    for i in 0..curves[0].table.rows.len() {
        let mut cells = vec![fmt(curves[0].table.rows[i].axis_value)];
        for c in curves {
            cells.extend(value_cells(&c.table.rows[i]).into_iter().map(|s| {
                if s.is_empty() {
                    "?".to_string()
                } else {
                    s
                }
            }));
        }
        writeln!(data, "{}", cells.join(" "))?;
    }

    let axis = curves[0].table.axis;
    writeln!(script, "set datafile missing \"?\"")?;
    writeln!(script, "set xlabel \"{}\"", axis.column_name())?;
    let ylabel = ycolumn.unwrap_or(match axis {
        Axis::Velocity => "DragM",
        _ => "ReEpsT",
    });
    let column = 2 + VALUE_COLUMNS
        .iter()
        .position(|c| *c == ylabel)
        .filter(|&i| i < 7)
        .ok_or_else(|| TableIoError::Schema(format!("cannot plot column `{ylabel}`")))?;
    writeln!(script, "set ylabel \"{ylabel}\"")?;
    let plots: Vec<String> = curves
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let title = c.label.as_deref().unwrap_or(ylabel);
            format!(
                "\"{data_name}\" using 1:{} with lines title \"{title}\"",
                column + k * VALUE_COLUMNS.len()
            )
        })
        .collect();
    writeln!(script, "plot {}", plots.join(", \\\n     "))?;
    Ok(())
}

fn parse_num(cell: &str, what: &str, line: usize) -> Result<f64, TableIoError> {
    let x: f64 = cell
        .trim()
        .parse()
        .map_err(|_| TableIoError::Schema(format!("line {line}: bad {what} value `{cell}`")))?;
    if !x.is_finite() {
        return schema(format!("line {line}: non-finite {what} value"));
    }
    Ok(x)
}

fn parse_row(axis_value: f64, cells: &[&str], line: usize) -> Result<Row, TableIoError> {
    let branch = match cells[7].trim() {
        "" => None,
        s => Some(
            Branch::parse(s)
                .ok_or_else(|| TableIoError::Schema(format!("line {line}: bad branch `{s}`")))?,
        ),
    };
    let outcome = match cells[8].trim() {
        "ok" => {
            let mut v = [0.0; 6];
            for (k, slot) in v.iter_mut().enumerate() {
                *slot = parse_num(cells[k], VALUE_COLUMNS[k], line)?;
            }
            let drag = match cells[6].trim() {
                "" => None,
                s => Some(parse_num(s, "DragM", line)?),
            };
            Ok(RowValues {
                eps_t: Complex64::new(v[0], v[1]),
                n_r: Complex64::new(v[2], v[3]),
                n_g: Complex64::new(v[4], v[5]),
                drag,
            })
        }
        s => Err(RowFailure::parse(s)
            .ok_or_else(|| TableIoError::Schema(format!("line {line}: bad flag `{s}`")))?),
    };
    Ok(Row {
        axis_value,
        branch,
        outcome,
    })
}

/// Parse a table or a wide family written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<Curve>, TableIoError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let head: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let Some(axis_name) = head.first() else {
        return schema("missing header");
    };
    let axis = Axis::from_column_name(axis_name)
        .ok_or_else(|| TableIoError::Schema(format!("unknown axis column `{axis_name}`")))?;
    let rest = &head[1..];
    if rest.is_empty() || !rest.len().is_multiple_of(VALUE_COLUMNS.len()) {
        return schema(format!("expected groups of {} value columns", VALUE_COLUMNS.len()));
    }

    let mut labels = Vec::new();
    for group in rest.chunks(VALUE_COLUMNS.len()) {
        let label = match group[0].strip_prefix(VALUE_COLUMNS[0]) {
            Some("") => None,
            Some(s) if s.starts_with('[') && s.ends_with(']') => Some(s[1..s.len() - 1].to_string()),
            _ => return schema(format!("unexpected column `{}`", group[0])),
        };
        for (name, want) in group.iter().zip(VALUE_COLUMNS) {
            let expected = match &label {
                Some(l) => format!("{want}[{l}]"),
                None => want.to_string(),
            };
            if *name != expected {
                return schema(format!("expected column `{expected}`, found `{name}`"));
            }
        }
        labels.push(label);
    }
    if labels.len() > 1 && labels.iter().any(Option::is_none) {
        return schema("family columns must all be labelled");
    }

    let mut curves: Vec<Curve> = labels
        .into_iter()
        .map(|label| Curve {
            label,
            table: SpectrumTable {
                axis,
                rows: Vec::new(),
            },
        })
        .collect();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.len() != head.len() {
            return schema(format!("line {line}: expected {} fields", head.len()));
        }
        let axis_value = parse_num(&record[0], axis_name, line)?;
        let cells: Vec<&str> = record.iter().skip(1).collect();
        for (curve, chunk) in curves.iter_mut().zip(cells.chunks(VALUE_COLUMNS.len())) {
            if let Some(prev) = curve.table.rows.last() {
                if axis_value <= prev.axis_value {
                    return schema(format!("line {line}: axis values must increase"));
                }
            }
            curve.table.rows.push(parse_row(axis_value, chunk, line)?);
        }
    }
    if curves[0].table.rows.is_empty() {
        return schema("table has no rows");
    }
    Ok(curves)
}
