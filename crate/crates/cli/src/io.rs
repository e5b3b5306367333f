//! CSV data and JSON metadata.
//!
//! CSV files start with the line `# cuspflow-schema v1`, then the header
//! `seed,param,statistic,value,se`. `param` identifies the row (for example
//! `T=1000000;orbit=3` or `lambda=4`); `se` is empty for exact quantities.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "cuspflow-schema v1";

pub fn version_string() -> String {
    format!("cuspflow {} ({})", env!("CARGO_PKG_VERSION"), env!("CUSPFLOW_GIT_REV"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub seed: u64,
    pub param: String,
    pub statistic: String,
    pub value: f64,
    pub se: Option<f64>,
}

/// Output of one experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
    /// Summary statistics and per-term breakdowns for the metadata file.
    pub summary: serde_json::Map<String, Value>,
}

impl Report {
    pub fn push(&mut self, seed: u64, param: impl Into<String>, statistic: &str, value: f64, se: Option<f64>) {
        self.rows.push(Row {
            seed,
            param: param.into(),
            statistic: statistic.into(),
            value,
            se,
        });
    }

    pub fn set(&mut self, key: &str, v: impl Serialize) {
        self.summary.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    /// First row with this statistic and param.
    pub fn find(&self, param: &str, statistic: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.param == param && r.statistic == statistic)
    }

    /// All values of a statistic, in row order.
    pub fn values(&self, statistic: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.statistic == statistic).map(|r| r.value).collect()
    }
}

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn write_csv<W: Write>(mut w: W, rows: &[Row]) -> CliResult<()> {
    writeln!(w, "# {SCHEMA}").map_err(|e| CliError::Csv(e.into()))?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["seed", "param", "statistic", "value", "se"])?;
    for r in rows {
        let se = r.se.map(fmt_f64).unwrap_or_default();
        out.write_record([r.seed.to_string(), r.param.clone(), r.statistic.clone(), fmt_f64(r.value), se])?;
    }
    out.flush().map_err(|e| CliError::Csv(e.into()))?;
    Ok(())
}

pub fn metadata(cfg: &RunConfig, report: &Report, csv_path: Option<&Path>) -> Value {
    json!({
        "schema": SCHEMA,
        "version": version_string(),
        "config": cfg,
        "csv": csv_path.map(|p| p.display().to_string()),
        "summary": Value::Object(report.summary.clone()),
    })
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Write `PREFIX.csv` and `PREFIX.json`, or CSV to stdout and metadata to
/// stderr when no prefix is configured. Returns the paths written.
pub fn emit(cfg: &RunConfig, report: &Report) -> CliResult<Option<(PathBuf, PathBuf)>> {
    match &cfg.output {
        Some(prefix) => {
            let (csv_path, json_path) = (with_ext(prefix, "csv"), with_ext(prefix, "json"));
            let open = |p: &Path| {
                File::create(p).map(BufWriter::new).map_err(|source| CliError::Write {
                    path: p.to_path_buf(),
                    source,
                })
            };
            write_csv(open(&csv_path)?, &report.rows)?;
            let meta = metadata(cfg, report, Some(&csv_path));
            let mut f = open(&json_path)?;
            serde_json::to_writer_pretty(&mut f, &meta)?;
            writeln!(f).and_then(|_| f.flush()).map_err(|source| CliError::Write {
                path: json_path.clone(),
                source,
            })?;
            Ok(Some((csv_path, json_path)))
        }
        None => {
            write_csv(std::io::stdout().lock(), &report.rows)?;
            let meta = metadata(cfg, report, None);
            eprintln!("{}", serde_json::to_string_pretty(&meta)?);
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_quoting() {
        let rows = vec![
            Row { seed: 7, param: "lambda=4".into(), statistic: "direct".into(), value: 0.5, se: Some(0.01) },
            Row { seed: 7, param: "a,b".into(), statistic: "exact".into(), value: 1.0, se: None },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# cuspflow-schema v1\nseed,param,statistic,value,se\n7,lambda=4,direct,0.5,0.01\n7,\"a,b\",exact,1,\n"
        );
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, 0.5, 2.6e-12, -3.25e20, 123456.789, f64::NAN] {
            let s = fmt_f64(x);
            let y: f64 = s.parse().unwrap();
            assert!(y == x || (x.is_nan() && y.is_nan()), "{s}");
        }
        assert_eq!(fmt_f64(2.5e-12), "2.5e-12");
    }

    #[test]
    fn prefix_gets_both_extensions() {
        assert_eq!(with_ext(Path::new("out/run.v2"), "csv"), PathBuf::from("out/run.v2.csv"));
    }
}
