//! CSV ingestion: a header row, one ISO-8601 date column, and decimal
//! arithmetic return columns. Rows must arrive in strictly increasing date
//! order; blank cells and duplicate dates are rejected with the offending
//! row named.

use chrono::NaiveDate;
use ndarray::Array2;
use renyirisk::backtest::ReturnMatrix;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv error in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("date column {0:?} not found in header")]
    MissingDateColumn(String),
    #[error("return column {0:?} not found in header")]
    MissingColumn(String),
    #[error("no return columns selected")]
    NoReturnColumns,
    #[error("row {row}: cannot parse date {value:?}")]
    BadDate { row: usize, value: String },
    #[error("row {row}, column {column}: {problem}")]
    BadCell { row: usize, column: String, problem: String },
    #[error("row {row}: duplicate date {date}")]
    DuplicateDate { row: usize, date: NaiveDate },
    #[error("row {row}: dates not increasing ({date} after {prev})")]
    OutOfOrder { row: usize, date: NaiveDate, prev: NaiveDate },
    #[error(transparent)]
    Matrix(#[from] renyirisk::backtest::BacktestError),
}

/// Reads `path` into a validated return panel. `columns` selects and orders
/// the asset columns; empty means every non-date column in header order.
pub fn ingest_csv(
    path: &str,
    date_column: &str,
    columns: &[String],
) -> Result<ReturnMatrix, IngestError> {
    let file = std::fs::File::open(path)
        .map_err(|source| IngestError::Io { path: path.into(), source })?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|source| IngestError::Csv { path: path.into(), source })?
        .iter()
        .map(str::to_string)
        .collect();
    let date_idx = headers
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| IngestError::MissingDateColumn(date_column.into()))?;

    let selected: Vec<(usize, String)> = if columns.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != date_idx)
            .map(|(i, h)| (i, h.clone()))
            .collect()
    } else {
        columns
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h == name)
                    .map(|i| (i, name.clone()))
                    .ok_or_else(|| IngestError::MissingColumn(name.clone()))
            })
            .collect::<Result<_, _>>()?
    };
    if selected.is_empty() {
        return Err(IngestError::NoReturnColumns);
    }

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (ri, record) in reader.records().enumerate() {
        let row = ri + 2; // 1-based, after the header line
        let record = record.map_err(|source| IngestError::Csv { path: path.into(), source })?;
        let raw_date = record.get(date_idx).unwrap_or("").to_string();
        let date = NaiveDate::parse_from_str(&raw_date, "%Y-%m-%d")
            .map_err(|_| IngestError::BadDate { row, value: raw_date })?;
        if let Some(&prev) = dates.last() {
            if date == prev {
                return Err(IngestError::DuplicateDate { row, date });
            }
            if date < prev {
                return Err(IngestError::OutOfOrder { row, date, prev });
            }
        }
        dates.push(date);
        for (idx, name) in &selected {
            let cell = record.get(*idx).unwrap_or("");
            if cell.is_empty() {
                return Err(IngestError::BadCell {
                    row,
                    column: name.clone(),
                    problem: "empty cell".into(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| IngestError::BadCell {
                row,
                column: name.clone(),
                problem: format!("cannot parse {cell:?} as a return"),
            })?;
            values.push(v);
        }
    }

    let n = selected.len();
    let t = dates.len();
    let returns = Array2::from_shape_vec((t, n), values).expect("shape by construction");
    let names = selected.into_iter().map(|(_, name)| name).collect();
    Ok(ReturnMatrix::new(dates, returns, names)?)
}
