//! CSV formats: point clouds in, nodal fields and cut labels out.
//!
//! Floats are written as `{:.16e}`, which keeps 17 significant digits and
//! round-trips every `f64`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use pleig_core::mesh::ScalarField;

use crate::error::{CliError, Result};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    }
}

fn finish(path: &Path, mut w: csv::Writer<File>) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes a mesh field with header `x,u` (1D) or `x,y,u` (2D), one row per
/// node in node-index order.
pub fn write_field_csv(path: &Path, u: &ScalarField<'_>) -> Result<()> {
    let mesh = u.mesh();
    let mut w = create(path)?;
    let header: &[&str] = if mesh.dim() == 1 { &["x", "u"] } else { &["x", "y", "u"] };
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for (node, &v) in mesh.nodes().iter().zip(u.values()) {
        let row: Vec<String> = node[..mesh.dim()].iter().chain([&v]).map(|&c| fmt_f64(c)).collect();
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

/// Writes a node vector next to its point coordinates, with header
/// `x[,y[,z]],u`.
pub fn write_point_field_csv(path: &Path, points: &[Vec<f64>], values: &[f64]) -> Result<()> {
    let dim = points.first().map_or(0, Vec::len);
    let mut w = create(path)?;
    let header: Vec<&str> = ["x", "y", "z"][..dim].iter().copied().chain(["u"]).collect();
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (pt, &v) in points.iter().zip(values) {
        let row: Vec<String> = pt.iter().chain([&v]).map(|&c| fmt_f64(c)).collect();
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

/// Writes `index,label` rows, label 1 for members of the cut side.
pub fn write_labels_csv(path: &Path, in_c: &[bool]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["index", "label"]).map_err(|e| csv_error(path, e))?;
    for (i, &c) in in_c.iter().enumerate() {
        w.write_record([i.to_string(), u8::from(c).to_string()]).map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

/// Reads points from rows `x[,y[,z]]`. A first row that does not parse as
/// numbers is taken as a header. All rows must have the same dimension.
pub fn read_points_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let pt = match parsed {
            Ok(pt) => pt,
            Err(_) if row == 0 => continue,
            Err(e) => return Err(CliError::format(path, format!("row {}: {e}", row + 1))),
        };
        if !(1..=3).contains(&pt.len()) {
            return Err(CliError::format(path, format!("row {}: expected 1 to 3 coordinates, got {}", row + 1, pt.len())));
        }
        if let Some(first) = points.first() {
            if first.len() != pt.len() {
                return Err(CliError::format(
                    path,
                    format!("row {}: {} coordinates, earlier rows have {}", row + 1, pt.len(), first.len()),
                ));
            }
        }
        if pt.iter().any(|c| !c.is_finite()) {
            return Err(CliError::format(path, format!("row {}: non-finite coordinate", row + 1)));
        }
        points.push(pt);
    }
    if points.is_empty() {
        return Err(CliError::format(path, "no points"));
    }
    Ok(points)
}

/// Writes raw text, as used for reports.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}
