//! Report emission: schema-tagged CSV tables and JSON run summaries.
//!
//! Every CSV starts with a `# schema: <tag>` comment line so downstream
//! readers can detect format changes; every JSON summary carries the same
//! tag plus a lossless echo of the resolved configuration.

use crate::config::{ExperimentKind, RunConfig};
use anyhow::{Context, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Schema tag of the JSON summary envelope.
pub const SUMMARY_SCHEMA: &str = "qcq-summary-v1";

/// A small in-memory CSV table with a schema tag.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub schema: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(schema: &'static str, header: &[&'static str]) -> Self {
        Self { schema, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "ragged CSV row");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# schema: {}", self.schema).unwrap();
        writeln!(out, "{}", self.header.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())
            .with_context(|| format!("writing {}", path.display()))
    }
}

/// Canonical cell formatting: shortest representation that parses back to
/// the same f64 (scientific notation at extreme magnitudes), so CSV output
/// is lossless and byte-stable.
pub fn cell(x: f64) -> String {
    format!("{x:?}")
}

/// Elapsed wall time for reports — zero in deterministic mode so reruns
/// are byte-identical.
pub fn elapsed_secs(cfg: &RunConfig, started: Instant) -> f64 {
    if cfg.deterministic {
        0.0
    } else {
        started.elapsed().as_secs_f64()
    }
}

/// Paths of the files one run writes.
#[derive(Debug, Clone, Serialize)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Where the run for `kind` puts its table and summary.
pub fn report_paths(cfg: &RunConfig, kind: ExperimentKind) -> ReportPaths {
    let dir = cfg.resolved_out_dir();
    let label = cfg.resolved_label(kind);
    ReportPaths {
        csv: dir.join(format!("{label}.csv")),
        summary: dir.join(format!("{label}.summary.json")),
    }
}

/// Write the CSV table and the JSON summary envelope for one run; returns
/// the paths written.
pub fn write_reports<R: Serialize>(
    cfg: &RunConfig,
    kind: ExperimentKind,
    table: &CsvTable,
    results: &R,
) -> Result<ReportPaths> {
    let paths = report_paths(cfg, kind);
    let dir = cfg.resolved_out_dir();
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    table.write(&paths.csv)?;
    let summary = serde_json::json!({
        "schema": SUMMARY_SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": kind.name(),
        "seed": cfg.seed,
        "config": serde_json::to_value(cfg)?,
        "results": serde_json::to_value(results)?,
    });
    std::fs::write(&paths.summary, format!("{:#}\n", summary))
        .with_context(|| format!("writing {}", paths.summary.display()))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_renders_schema_line_then_rows() {
        let mut t = CsvTable::new("qcq-test-v1", &["a", "b"]);
        t.push(vec![cell(1.0), cell(0.1 + 0.2)]);
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema: qcq-test-v1");
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1.0,0.30000000000000004");
    }

    #[test]
    fn cells_roundtrip_floats() {
        for x in [1.0, -0.5, 27.834_561_2e-3, f64::MIN_POSITIVE, 1e300, 1.25e-85] {
            assert_eq!(cell(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(cell(1.25e-85), "1.25e-85", "extreme magnitudes use scientific notation");
    }
}
