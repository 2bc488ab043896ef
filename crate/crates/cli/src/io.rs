use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn open_input(path: Option<&Path>) -> Result<Box<dyn Read>> {
    Ok(match path {
        Some(p) => Box::new(File::open(p).with_context(|| format!("opening {}", p.display()))?),
        None => Box::new(io::stdin()),
    })
}

pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Numeric columns of a CSV stream. A first row that does not parse is
/// taken as a header; `#` lines are comments; empty cells become `None`.
pub fn read_numeric_csv(input: Box<dyn Read>) -> Result<Vec<Vec<Option<f64>>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.context("reading CSV")?;
        let parsed: std::result::Result<Vec<Option<f64>>, _> =
            record.iter().map(|cell| if cell.is_empty() { Ok(None) } else { cell.parse::<f64>().map(Some) }).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => bail!("row {}: {e}", line + 1),
        }
    }
    Ok(rows)
}

/// Two-column categorical CSV with a header row.
pub fn read_pairs(input: Box<dyn Read>) -> Result<Vec<(String, String)>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.context("reading pairs CSV")?;
        if record.len() != 2 {
            bail!("expected two columns, found {}", record.len());
        }
        pairs.push((record[0].to_string(), record[1].to_string()));
    }
    Ok(pairs)
}

/// Writes CSV rows to stdout after optional `#` comment lines.
pub fn write_csv(comments: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = io::stdout().lock();
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}
