use std::path::Path;

use crate::dataset::matrix::DataMatrix;
use crate::dataset::schema::Schema;
use crate::error::{Error, Result};

/// Cells equal to one of these (after trimming) are treated as missing.
pub const MISSING_MARKERS: [&str; 2] = ["", "NA"];

/// Reads a comma-separated file whose header matches `schema` exactly.
///
/// Rows whose response cell is missing are dropped with a warning.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<DataMatrix> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: std::io::Read>(reader: R, schema: &Schema) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let expected = schema.names();
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(h, e)| h != e) {
        return Err(Error::HeaderMismatch {
            expected: expected.join(","),
            found: header.join(","),
        });
    }

    let m = schema.len();
    let resp = schema.response_index();
    let mut values = Vec::new();
    let mut missing = Vec::new();
    let mut n_records = 0usize;
    let mut dropped = 0usize;
    let mut row_vals = vec![0.0; m];
    let mut row_miss = vec![false; m];

    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        n_records += 1;
        if record.len() != m {
            return Err(Error::BadCell {
                row: i,
                column: format!("<{} fields>", record.len()),
                value: record.iter().collect::<Vec<_>>().join(","),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            if MISSING_MARKERS.contains(&cell) {
                row_vals[j] = f64::NAN;
                row_miss[j] = true;
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::BadCell {
                    row: i,
                    column: schema.name(j).to_string(),
                    value: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::BadCell {
                        row: i,
                        column: schema.name(j).to_string(),
                        value: cell.to_string(),
                    });
                }
                row_vals[j] = v;
                row_miss[j] = false;
            }
        }
        if row_miss[resp] {
            dropped += 1;
            continue;
        }
        values.extend_from_slice(&row_vals);
        missing.extend_from_slice(&row_miss);
    }

    if n_records == 0 {
        return Err(Error::EmptyDataset);
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} row(s) with a missing response");
    }
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    DataMatrix::from_parts(schema.clone(), values, missing)
}

/// Writes the matrix with a header row; missing cells are written as `NA`.
pub fn write_csv(data: &DataMatrix, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(data, file)
}

pub fn write_csv_to<W: std::io::Write>(data: &DataMatrix, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(data.schema().names())?;
    let mut cells = Vec::with_capacity(data.n_cols());
    for i in 0..data.n_rows() {
        cells.clear();
        for j in 0..data.n_cols() {
            if data.is_missing(i, j) {
                cells.push("NA".to_string());
            } else {
                cells.push(data.get(i, j).to_string());
            }
        }
        wtr.write_record(&cells)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}
