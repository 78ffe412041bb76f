//! Convergence tables in CSV and Markdown.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::runner::RunRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(Error::Config(format!("unknown table format {other:?}"))),
        }
    }
}

/// Parsed table cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn error_cell(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:.2e}"),
        _ => "--".into(),
    }
}

fn order_cell(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:.2}"),
        _ => "--".into(),
    }
}

/// Cells of the table for `record`: one row per level, an error and an
/// order column per norm.
pub fn table(record: &RunRecord) -> Table {
    let spec = &record.spec;
    let mut header = vec![spec.axis.symbol().to_string()];
    for norm in &spec.norms {
        header.push(norm.label().to_string());
        header.push(format!("{} order", norm.label()));
    }
    let orders: Vec<Vec<Option<f64>>> = spec.norms.iter().map(|&n| record.orders(n)).collect();
    let rows = record
        .levels
        .iter()
        .enumerate()
        .map(|(i, level)| {
            let mut row = vec![format!("2^-{}", level.level)];
            for (k, &norm) in spec.norms.iter().enumerate() {
                row.push(error_cell(level.value(norm)));
                row.push(order_cell(orders[k][i]));
            }
            row
        })
        .collect();
    Table { header, rows }
}

/// Renders the table of `record`; identical records give identical bytes.
pub fn emit_tables(record: &RunRecord, format: TableFormat) -> String {
    let t = table(record);
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&t.header).expect("in-memory write");
            for row in &t.rows {
                w.write_record(row).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
        }
        TableFormat::Markdown => {
            let mut out = String::new();
            let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
            out.push_str(&line(&t.header));
            let _ = writeln!(out, "|{}", "---|".repeat(t.header.len()));
            for row in &t.rows {
                out.push_str(&line(row));
            }
            out
        }
    }
}

/// Reads a table back; Markdown is reduced to CSV first.
pub fn parse_table(text: &str, format: TableFormat) -> Result<Table> {
    let csv_text = match format {
        TableFormat::Csv => text.to_string(),
        TableFormat::Markdown => markdown_to_csv(text)?,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(csv_text.as_bytes());
    let bad = |e: csv::Error| Error::Data(format!("malformed table: {e}"));
    let header = reader
        .headers()
        .map_err(bad)?
        .iter()
        .map(String::from)
        .collect();
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()).map_err(bad))
        .collect::<Result<_>>()?;
    Ok(Table { header, rows })
}

fn markdown_to_csv(text: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let inner = line
            .strip_prefix('|')
            .and_then(|l| l.strip_suffix('|'))
            .ok_or_else(|| Error::Data(format!("not a table row: {line}")))?;
        let cells: Vec<&str> = inner.split('|').map(str::trim).collect();
        if cells
            .iter()
            .all(|c| !c.is_empty() && c.chars().all(|ch| ch == '-' || ch == ':'))
        {
            continue;
        }
        w.write_record(&cells)
            .map_err(|e| Error::Data(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets::preset;
    use crate::harness::runner::{Artifacts, LevelRecord};
    use crate::metrics::ErrorReport;

    fn record(errors: &[(f64, f64)]) -> RunRecord {
        let spec = preset("exp1-f-smooth-h").unwrap();
        let levels = errors
            .iter()
            .enumerate()
            .map(|(i, &(e1, e2))| LevelRecord {
                level: 3 + i as u32,
                h: 0.0,
                tau: 0.0,
                seconds: i as f64,
                e1: Some(e1),
                e2: Some(e2),
                nodal: None,
                error: None,
            })
            .collect();
        RunRecord {
            spec,
            reference_seconds: 0.0,
            total_seconds: 0.0,
            levels,
            report: ErrorReport::default(),
            expectations: Vec::new(),
            e1_monotone: true,
            artifacts: Artifacts::default(),
        }
    }

    #[test]
    fn empty_ladder_gives_header_only() {
        let r = record(&[]);
        assert_eq!(
            emit_tables(&r, TableFormat::Csv),
            "h,E1,E1 order,E2,E2 order\n"
        );
        let md = emit_tables(&r, TableFormat::Markdown);
        assert_eq!(md.lines().count(), 2);
        assert!(parse_table(&md, TableFormat::Markdown)
            .unwrap()
            .rows
            .is_empty());
    }

    #[test]
    fn orders_and_significant_digits() {
        let r = record(&[(4e-2, 0.123456), (1e-2, 0.0617)]);
        let t = parse_table(&emit_tables(&r, TableFormat::Csv), TableFormat::Csv).unwrap();
        assert_eq!(t.rows[0], ["2^-3", "4.00e-2", "--", "1.23e-1", "--"]);
        assert_eq!(t.rows[1][1], "1.00e-2");
        assert_eq!(t.rows[1][2], "2.00");
        assert_eq!(t.rows[1][4], "1.00");
    }

    #[test]
    fn markdown_round_trips_through_csv_parser() {
        let r = record(&[(3.3e-2, 1.1e-1), (9.1e-3, 5.2e-2), (2.4e-3, 2.6e-2)]);
        let csv = parse_table(&emit_tables(&r, TableFormat::Csv), TableFormat::Csv).unwrap();
        let md = parse_table(
            &emit_tables(&r, TableFormat::Markdown),
            TableFormat::Markdown,
        )
        .unwrap();
        assert_eq!(csv, md);
        assert_eq!(csv.rows.len(), 3);
    }

    #[test]
    fn output_ignores_timings() {
        let a = record(&[(4e-2, 0.1), (1e-2, 0.05)]);
        let mut b = a.clone();
        b.levels[0].seconds = 99.0;
        b.total_seconds = 12.0;
        for f in [TableFormat::Csv, TableFormat::Markdown] {
            assert_eq!(emit_tables(&a, f), emit_tables(&b, f));
        }
        assert!("md".parse::<TableFormat>().is_ok());
        assert!("xml".parse::<TableFormat>().is_err());
    }
}
