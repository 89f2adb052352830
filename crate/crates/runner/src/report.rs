//! CSV and JSON emission.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Format, SCHEMA_VERSION};
use crate::error::{RunError, RunResult};
use crate::scenario::ReportBundle;

pub const CSV_HEADER: [&str; 7] = ["bound_id", "scenario", "n_samples", "empirical_constant", "margin", "pass", "notes"];

/// A set of bundles written as one file pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub bundles: Vec<ReportBundle>,
}

impl ReportFile {
    pub fn new(bundles: Vec<ReportBundle>) -> Self {
        Self { schema_version: SCHEMA_VERSION, bundles }
    }

    pub fn from_json(src: &str) -> RunResult<Self> {
        let f: Self = serde_json::from_str(src).map_err(|e| RunError::Config(format!("report: {e}")))?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(RunError::Config(format!("report schema_version {} is not {SCHEMA_VERSION}", f.schema_version)));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for b in &self.bundles {
            for r in &b.reports {
                w.write_record([
                    r.bound_id.clone(),
                    r.scenario.clone(),
                    r.samples.len().to_string(),
                    r.empirical_constant.map(|c| format!("{c:e}")).unwrap_or_default(),
                    format!("{:e}", r.margin),
                    r.pass.to_string(),
                    r.notes.join("; "),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    /// Writes `<stem>.csv` and/or `<stem>.json` under `dir`.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> RunResult<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if matches!(format, Format::Csv | Format::Both) {
            let p = dir.join(format!("{stem}.csv"));
            fs::write(&p, self.to_csv())?;
            written.push(p);
        }
        if matches!(format, Format::Json | Format::Both) {
            let p = dir.join(format!("{stem}.json"));
            fs::write(&p, self.to_json())?;
            written.push(p);
        }
        Ok(written)
    }
}
