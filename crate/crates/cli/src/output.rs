//! Schema-versioned CSV emission. Every table starts with a
//! `# schema=renyirisk/<name>/v1` comment line so downstream tooling can
//! pin formats; floats are written in shortest round-trip form, which makes
//! re-runs byte-identical.

use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: &str = "v1";

pub fn schema_line(name: &str) -> String {
    format!("# schema=renyirisk/{name}/{SCHEMA_VERSION}")
}

pub fn write_table<P: AsRef<Path>>(
    path: P,
    name: &str,
    columns: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "{}", schema_line(name))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()
}

pub fn fmt(v: f64) -> String {
    format!("{v}")
}
