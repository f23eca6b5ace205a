//! Result emission: CSV with a stable column order and RFC-style quoting,
//! or JSON as an array of records.

use super::{HarnessError, ResultRow};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Render rows to bytes; the CSV layout is fixed so golden files stay
/// byte-stable across runs.
pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<Vec<u8>, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Config("no result rows to emit".into()));
    }
    let mut out = Vec::new();
    match format {
        OutputFormat::Csv => {
            out.extend_from_slice(b"experiment,params,metric,value,std_error,trials\n");
            for row in rows {
                let params = row
                    .params
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(";");
                let line = format!(
                    "{},{},{},{:.12e},{:.12e},{}\n",
                    csv_quote(&row.experiment),
                    csv_quote(&params),
                    csv_quote(&row.metric),
                    row.value,
                    row.std_error,
                    row.trials
                );
                out.extend_from_slice(line.as_bytes());
            }
        }
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(rows)
                .map_err(|e| HarnessError::Numerical(e.to_string()))?;
            out.extend_from_slice(text.as_bytes());
            out.push(b'\n');
        }
    }
    Ok(out)
}

/// Write rows to `path` (or stdout when `None`). Errors before creating
/// the file when there is nothing to write.
pub fn emit(
    rows: &[ResultRow],
    format: OutputFormat,
    path: Option<&Path>,
) -> Result<(), HarnessError> {
    let bytes = render(rows, format)?;
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(&bytes)?;
        }
        None => {
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ExperimentId;

    fn rows() -> Vec<ResultRow> {
        vec![
            ResultRow::new(
                ExperimentId::Table1,
                &[("rho", "0.05".into()), ("xi", "0.53".into())],
                "ours_rate_decrease_pct",
                14.1,
                0.2,
                2000,
            ),
            ResultRow::new(ExperimentId::Table1, &[], "rate_no_attack_bits", 2.5, 0.01, 2000),
        ]
    }

    #[test]
    fn empty_rows_error_without_creating_file() {
        let path = std::env::temp_dir().join("ris_cma_emit_empty.csv");
        let _ = std::fs::remove_file(&path);
        assert!(emit(&[], OutputFormat::Csv, Some(&path)).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn csv_layout_stable() {
        let a = render(&rows(), OutputFormat::Csv).unwrap();
        let b = render(&rows(), OutputFormat::Csv).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("experiment,params,metric,value,std_error,trials\n"));
        assert!(text.contains("rho=0.05;xi=0.53"));
    }

    #[test]
    fn json_roundtrip_identical_records() {
        let original = rows();
        let bytes = render(&original, OutputFormat::Json).unwrap();
        let parsed: Vec<ResultRow> = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(parsed, original);
    }
}
